import csv
import json
import math

import numpy as np
import pytest

from kbfinsler.cli import main
from kbfinsler.report import (SCHEMA_VERSION, RunConfig, clean, document, dumps, load_report,
                              recompute_aggregates, stored_aggregates)

MINK_DSL = "# n = 2\nnorm2v + 0.5*sqrt(pow(abs2(v[1]),2) + pow(abs2(v[2]),2))\n"


def run(tmp_path, *argv, name="out.json"):
    path = tmp_path / name
    code = main([*argv, "--json", str(path)])
    return code, (load_report(path) if code == 0 else None), path


def test_classify_bergman_report(tmp_path):
    code, doc, _ = run(tmp_path, "classify", "--metric", "bergman", "--n", "2", "--c", "-4",
                       "--samples", "6", "--seed", "42")
    assert code == 0
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["config"]["seed"] == 42 and doc["config"]["tolerances"]["jet"] == 1e-7
    verdicts = {p["name"]: p["verdict"] for p in doc["predicates"]}
    assert verdicts["kahler_berwald"] == "holds"
    assert "json" not in doc["config"]


def test_classify_dsl_file(tmp_path):
    f = tmp_path / "f.dsl"
    f.write_text(MINK_DSL)
    code, doc, _ = run(tmp_path, "classify", "--metric-file", str(f), "--samples", "4")
    assert code == 0
    verdicts = {p["name"]: p["verdict"] for p in doc["predicates"]}
    assert verdicts["hermitian_quadratic"] == "fails" and verdicts["complex_berwald"] == "holds"


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["classify", "--metric", "bergman", "--c", "1"]) == 2
    assert "c must be negative" in capsys.readouterr().err
    assert main(["classify", "--metric", "nope"]) == 2
    assert main(["classify"]) == 2
    assert main(["classify", "--metric", "euclidean", "--t", "0.5"]) == 2
    assert main(["classify", "--metric", "bergman", "--samples", "0"]) == 2
    bad = tmp_path / "bad.dsl"
    bad.write_text("# n = 1\nv[2]\n")
    assert main(["classify", "--metric-file", str(bad)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["classify", "--metric", "bergman", "--bogus"])
    assert exc.value.code == 2


def test_evaluation_abort_exit_3(tmp_path):
    f = tmp_path / "punctured.dsl"
    f.write_text("# n = 1\nnorm2v / norm2z\n")
    assert main(["transport", "--metric-file", str(f), "--ode-steps", "10"]) == 3


def test_report_roundtrip_reproduces_aggregates(tmp_path):
    code, doc, _ = run(tmp_path, "curvature", "--metric", "fubini_study", "--samples", "8")
    assert code == 0
    again = recompute_aggregates(doc)
    stored = stored_aggregates(doc)
    assert again == stored
    code, doc, _ = run(tmp_path, "classify", "--metric", "polydisk_tk", "--samples", "3", name="c.json")
    assert recompute_aggregates(doc) == stored_aggregates(doc)


def test_curvature_csv(tmp_path):
    out = tmp_path / "h.csv"
    code, doc, _ = run(tmp_path, "curvature", "--metric", "bergman", "--samples", "5", "--csv", str(out))
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["index", "x1", "x2", "x3", "x4", "y1", "y2", "y3", "y4", "hsc", "hsc_imag"]
    assert len(rows) == 6
    assert all(abs(float(r[9]) + 4) <= 1e-6 for r in rows[1:])
    assert doc["curvature"]["ke_residual_max"] <= 1e-6
    assert doc["curvature"]["stats"]["mean"] == pytest.approx(-4, abs=1e-6)


def test_transport_poincare(tmp_path):
    out = tmp_path / "t.csv"
    code, doc, _ = run(tmp_path, "transport", "--metric", "bergman", "--n", "1", "--ode-steps", "200",
                       "--csv", str(out))
    assert code == 0
    tr = doc["trajectories"][0]
    assert tr["x_final"][0] == pytest.approx(math.tanh(1.0), abs=1e-6)
    assert tr["type_preserved"] and tr["j_commutes"]
    rows = list(csv.reader(out.open()))
    assert rows[0][:3] == ["t", "x1", "x2"] and len(rows) == 202


def test_transport_euclidean_exact(tmp_path):
    code, doc, _ = run(tmp_path, "transport", "--metric", "euclidean", "--n", "2", "--ode-steps", "10")
    tr = doc["trajectories"][0]
    assert tr["V_final"] == [1.0, 0.0, 0.0, 0.0]
    assert tr["type_preservation_residual"] == 0.0


@pytest.mark.parametrize("argv, key", [
    (["verify", "--theorem", "A", "--metric", "bergman", "--n", "2", "--c", "-4", "--samples", "4"], "A"),
    (["verify", "--theorem", "B", "--metric", "minkowski_tk", "--t", "0.5", "--k", "2", "--samples", "3",
      "--ode-steps", "20"], "B"),
])
def test_verify_theorems(tmp_path, argv, key):
    code, doc, _ = run(tmp_path, *argv)
    assert code == 0
    ver = doc["verification"]
    assert ver["theorem"] == key and ver["consistent"]
    if key == "B":
        assert all(r["kahler_berwald"] and r["j_horizontal"] and r["transport"] for r in ver["rows"])


def test_verify_lemma_and_transform(tmp_path):
    code, doc, _ = run(tmp_path, "verify", "--theorem", "lemma-inner", "--metric", "fubini_study",
                       "--c", "4", "--samples", "6")
    assert code == 0 and doc["verification"]["max_residual"] <= 1e-9
    code, doc, _ = run(tmp_path, "verify", "--theorem", "transform", "--metric", "bergman",
                       "--samples", "3", name="t.json")
    assert code == 0
    assert all(p["max_residual"] <= 1e-6 for p in doc["predicates"])


def test_reports_are_byte_identical(tmp_path):
    argv = ["classify", "--metric", "hermitian_nonkahler", "--samples", "4"]
    _, _, a = run(tmp_path, *argv, name="a.json")
    _, _, b = run(tmp_path, *argv, name="b.json")
    assert a.read_bytes() == b.read_bytes()


def test_stdout_when_no_json_path(capsys):
    assert main(["classify", "--metric", "euclidean", "--samples", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["subcommand"] == "classify"


def test_clean_handles_numpy_and_nonfinite():
    out = clean({"a": np.float64(0.1), "b": np.array([1, 2]), "c": 1 + 2j, "d": float("nan"),
                 "e": np.bool_(True), "f": RunConfig("classify")})
    assert out["a"] == 0.1 and out["b"] == [1, 2] and out["c"] == {"re": 1.0, "im": 2.0}
    assert out["d"] is None and out["e"] is True and out["f"]["samples"] == 32
    text = dumps(document(RunConfig("classify", json="x.json")))
    assert json.loads(text)["config"].get("json") is None


def test_floats_roundtrip_exactly(tmp_path):
    vals = [0.1, 1 / 3, 2 ** -40, 123456.789e-300]
    path = tmp_path / "r.json"
    path.write_text(dumps(document(RunConfig("classify"), curvature={"vals": vals})))
    assert load_report(path)["curvature"]["vals"] == vals


def test_unsupported_schema(tmp_path):
    p = tmp_path / "old.json"
    p.write_text(json.dumps({"schema_version": 0}))
    with pytest.raises(ValueError):
        load_report(p)
