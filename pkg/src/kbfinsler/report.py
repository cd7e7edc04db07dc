"""JSON report documents and CSV emission.

Floats are written with Python's shortest round-trip repr, so reading a
report back yields bit-identical numbers.  Non-finite values become ``null``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
TOOL = "kbfinsler"


@dataclass
class RunConfig:
    subcommand: str
    metric: str | None = None
    metric_file: str | None = None
    n: int | None = None
    c: float | None = None
    t: float | None = None
    k: int | None = None
    samples: int = 32
    seed: int = 42
    tol: float | None = None
    tolerances: dict = field(default_factory=dict)
    ode_steps: int | None = None
    derivative_mode: str = "jet"
    json: str | None = None
    csv: str | None = None
    theorem: str | None = None


def clean(obj):
    """Convert numpy/dataclass/complex values to plain JSON data."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return clean(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": clean(float(obj.real)), "im": clean(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else None
    return obj


def document(config, **sections):
    from . import __version__

    echo = clean(config)
    if isinstance(echo, dict):
        # output locations do not affect results; leaving them out keeps reports byte-comparable
        echo = {k: v for k, v in echo.items() if k not in ("json", "csv")}
    doc = {"schema_version": SCHEMA_VERSION, "tool": {"name": TOOL, "version": __version__},
           "config": echo}
    doc.update({k: clean(v) for k, v in sections.items() if v is not None})
    doc.setdefault("predicates", [])
    doc.setdefault("timings", {})
    return doc


def dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_report(doc, path):
    Path(path).write_text(dumps(doc), encoding="utf-8")


def load_report(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema {doc.get('schema_version')!r}")
    return doc


def recompute_aggregates(doc):
    """Aggregates rebuilt from per-sample data stored in a report."""
    out = {}
    for p in doc.get("predicates", []):
        vals = [r for r in p["residuals"] if r is not None]
        out[p["name"]] = max(vals) if vals else None
    curv = doc.get("curvature")
    if curv and curv.get("samples"):
        h = np.array([s["hsc"] for s in curv["samples"] if s.get("error") is None])
        if h.size:
            out["hsc"] = {"min": float(h.min()), "max": float(h.max()), "mean": float(h.mean()),
                          "std": float(h.std()), "spread": float(h.max() - h.min()), "count": int(h.size)}
    return out


def stored_aggregates(doc):
    out = {p["name"]: p["max_residual"] for p in doc.get("predicates", [])}
    curv = doc.get("curvature")
    if curv and curv.get("samples") and curv.get("stats", {}).get("count"):
        out["hsc"] = curv["stats"]
    return out


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")
