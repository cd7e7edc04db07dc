"""Command-line front end.

Exit codes: 0 when the run completes (verdicts are data), 2 on configuration
errors, 3 when evaluation aborts.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .classify import Tolerances, classify, ordered_map, verify_equivalences
from .errors import FinslerError, ParamError
from .metrics import CATALOG, ALIASES, SamplePlan, make_metric
from .report import RunConfig, document, dumps, write_csv, write_report

DEFAULT_ODE_STEPS = {"transport": 1000, "verify": 100}

CSV_HELP = """CSV columns:
  curvature: index, x1..x2n, y1..y2n, hsc, hsc_imag
  transport: t, x1..x2n, y1..y2n, V1..V2n, energy, type_residual
"""


class ConfigError(Exception):
    pass


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--metric", help=f"catalog id: {', '.join(sorted(CATALOG))}")
    common.add_argument("--metric-file", help="DSL file with header '# n = <dim>'")
    common.add_argument("--n", type=int, help="complex dimension")
    common.add_argument("--c", type=float, help="curvature constant (bergman < 0, fubini_study > 0)")
    common.add_argument("--t", type=float, help="Minkowski weight t >= 0")
    common.add_argument("--k", type=int, help="Minkowski exponent k >= 2")
    common.add_argument("--samples", type=int, default=32)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--tol", type=float, help="residual tolerance (default 1e-7 jet, 1e-4 fd)")
    common.add_argument("--ode-steps", type=int, help="RK4 steps (default 1000 transport, 100 verify)")
    common.add_argument("--derivative-mode", choices=("jet", "fd", "fd-oracle"), default="jet")
    common.add_argument("--json", help="write the JSON report here (default: stdout)")
    common.add_argument("--csv", help="write per-sample or per-step rows here")

    parser = argparse.ArgumentParser(prog="kbfinsler", description="complex Finsler metric workbench",
                                     epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("classify", parents=[common], help="evaluate every predicate over a sample plan")
    sub.add_parser("curvature", parents=[common], help="holomorphic sectional curvature scan",
                   epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub.add_parser("transport", parents=[common], help="geodesic from the origin with parallel transport",
                   epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    v = sub.add_parser("verify", parents=[common], help="two-way equivalence suites")
    v.add_argument("--theorem", choices=("A", "B", "transform", "lemma-inner"), required=True)
    return parser


def config_from_args(ns):
    mode = "fd" if ns.derivative_mode in ("fd", "fd-oracle") else "jet"
    tol = Tolerances()
    if ns.tol is not None:
        if ns.tol <= 0:
            raise ConfigError("--tol must be positive")
        tol = Tolerances(jet=ns.tol, fd=ns.tol)
    if ns.samples < 1:
        raise ConfigError("--samples must be at least 1")
    steps = ns.ode_steps if ns.ode_steps is not None else DEFAULT_ODE_STEPS.get(ns.subcommand)
    if steps is not None and steps < 10:
        raise ConfigError("--ode-steps must be at least 10")
    cfg = RunConfig(ns.subcommand, ns.metric, ns.metric_file, ns.n, ns.c, ns.t, ns.k, ns.samples, ns.seed,
                    ns.tol, tol.to_dict(), steps, mode, ns.json, ns.csv, getattr(ns, "theorem", None))
    return cfg, tol


def resolve_metric(cfg):
    if cfg.metric and cfg.metric_file:
        raise ConfigError("give either --metric or --metric-file, not both")
    if cfg.metric_file:
        from .dsl import load_dsl_file

        try:
            m = load_dsl_file(cfg.metric_file)
        except OSError as exc:
            raise ConfigError(f"cannot read {cfg.metric_file}: {exc}") from None
        if cfg.n is not None and cfg.n != m.n:
            raise ConfigError(f"--n {cfg.n} disagrees with the file header n = {m.n}")
        return m
    if not cfg.metric:
        raise ConfigError("one of --metric or --metric-file is required")
    key = ALIASES.get(cfg.metric, cfg.metric)
    if key not in CATALOG:
        raise ConfigError(f"unknown metric {cfg.metric!r}; choose from {', '.join(sorted(CATALOG))}")
    given = {"n": cfg.n, "c": cfg.c, "t": cfg.t, "k": cfg.k}
    extra = [p for p, val in given.items() if val is not None and p not in CATALOG[key].params]
    if extra:
        raise ConfigError(f"metric {key} takes no parameter(s) {', '.join('--' + p for p in extra)}")
    return make_metric(key, **given)


# ---------------------------------------------------------------------------
# subcommands

def cmd_classify(cfg, tol, metric):
    plan = SamplePlan(cfg.samples, cfg.seed)
    rep = classify(metric, plan, tol, cfg.derivative_mode)
    doc = document(cfg, metric=rep.metric, plan=rep.plan,
                   predicates=[r.to_dict() for r in rep.predicates],
                   implications=rep.implications, skipped=rep.skipped,
                   timings={"samples": cfg.samples, "skipped": len(rep.skipped)})
    return doc, None


def _curvature_constant(metric):
    c = metric.params.get("c")
    return float(c) if c else None


def cmd_curvature(cfg, tol, metric):
    from .curvature import constant_hsc_scan

    plan = SamplePlan(cfg.samples, cfg.seed)
    c = _curvature_constant(metric)
    scan = constant_hsc_scan(metric, plan, tol.hsc, cfg.derivative_mode, ke_constant=c, mapper=ordered_map)
    ke = [s.ke_residual for s in scan.samples if s.ke_residual is not None]
    curv = {"stats": scan.stats, "constant": scan.constant, "tolerance": tol.hsc,
            "convention": scan.convention, "ke_constant": c,
            "ke_residual_max": max(ke) if ke else None,
            "failures": scan.failures,
            "samples": [{"index": s.index, "z": s.z, "v": s.v, "hsc": s.hsc, "hsc_imag": s.hsc_imag,
                         "ke_residual": s.ke_residual, "error": s.error} for s in scan.samples]}
    doc = document(cfg, metric=metric.identity(), plan=plan.to_dict(), curvature=curv,
                   timings={"samples": cfg.samples, "failures": scan.failures})
    rows = None
    if cfg.csv:
        from .geometry import to_real

        d = 2 * metric.n
        header = ["index"] + [f"x{i + 1}" for i in range(d)] + [f"y{i + 1}" for i in range(d)] + ["hsc", "hsc_imag"]
        rows = (header, [[s.index, *to_real(s.z), *to_real(s.v), s.hsc, s.hsc_imag] for s in scan.samples])
    return doc, rows


def cmd_transport(cfg, tol, metric):
    from .geometry import PointState, apply_J, decompose_type
    from .transport import Curve, parallel_transport

    n = metric.n
    x0 = np.zeros(2 * n)
    e1 = np.zeros(2 * n)
    e1[0] = 1.0
    y0 = e1 / np.sqrt(metric.f2(PointState(x0, e1).z, PointState(x0, e1).v))
    res = parallel_transport(metric, Curve.geodesic(x0, y0, 1.0), np.column_stack([e1, apply_J(e1)]),
                             cfg.ode_steps)
    P, PJ = res.V[:, :, 0], res.V[:, :, 1]
    type_hist = np.array([np.linalg.norm(decompose_type(0.5 * (a - 1j * b))[1]) for a, b in zip(P, PJ)])
    jcomm = float(np.linalg.norm(PJ - np.array([apply_J(u) for u in P]), axis=1).max())
    energy = np.array([metric.f2(PointState(a, b).z, PointState(a, b).v) for a, b in zip(res.x, res.y)])
    traj = {"label": "origin along e1, unit speed", "T": 1.0, "steps": cfg.ode_steps,
            "x0": x0, "y0": y0, "x_final": res.x[-1], "y_final": res.y[-1], "V_final": P[-1],
            "energy_drift": float(np.abs(energy - energy[0]).max()),
            "metric_drift": res.metric_drift(),
            "type_preservation_residual": float(type_hist.max()),
            "j_commutation_residual": jcomm,
            "type_preserved": bool(type_hist.max() <= tol.ode),
            "j_commutes": bool(jcomm <= tol.ode)}
    doc = document(cfg, metric=metric.identity(), trajectories=[traj],
                   timings={"steps": cfg.ode_steps, "trajectories": 1})
    rows = None
    if cfg.csv:
        d = 2 * n
        header = (["t"] + [f"x{i + 1}" for i in range(d)] + [f"y{i + 1}" for i in range(d)]
                  + [f"V{i + 1}" for i in range(d)] + ["energy", "type_residual"])
        rows = (header, [[t, *x, *y, *V, e, r] for t, x, y, V, e, r in
                         zip(res.t, res.x, res.y, P, energy, type_hist)])
    return doc, rows


def cmd_verify(cfg, tol, metric):
    plan = SamplePlan(cfg.samples, cfg.seed)
    th = cfg.theorem
    if th in ("A", "B"):
        rep = classify(metric, plan, tol, cfg.derivative_mode)
        ver = verify_equivalences(metric, plan, tol, cfg.derivative_mode, report=rep,
                                  ode_steps=cfg.ode_steps, transport_samples=8 if th == "B" else 0)
        key = "theorem_A" if th == "A" else "theorem_B"
        outcome = {"theorem": th, "consistent": ver[key]["consistent"], "label": ver[key]["label"],
                   "weakly_kahler": ver["weakly_kahler"], "transport_samples": ver["transport_samples"],
                   "rows": ver["rows"]}
        names = (("j_horizontal_parallel", "j_vertical_parallel", "coincidence_horizontal",
                  "coincidence_vertical", "coincidence_nonlinear") if th == "A" else
                 ("kahler_berwald", "weakly_kahler", "j_horizontal_parallel", "h_j_invariant"))
        preds = [rep.get(nm).to_dict() for nm in names]
    elif th == "transform":
        outcome, preds = _verify_transform(metric, plan, tol, cfg)
    else:
        outcome, preds = _verify_lemma(metric, plan, tol, cfg)
    doc = document(cfg, metric=metric.identity(), plan=plan.to_dict(), predicates=preds,
                   verification=outcome, timings={"samples": cfg.samples})
    return doc, None


def _verify_transform(metric, plan, tol, cfg):
    from .charts import linear_map, quadratic_map, transform_residuals
    from .classify import PredicateResult
    from .errors import HypothesisError

    n = metric.n
    rng = np.random.default_rng(cfg.seed)
    A = np.eye(n) + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    maps = {"linear": linear_map(A), "quadratic": quadratic_map(n, 0.05)}
    pts = plan.points(metric)
    rows, preds = [], []
    for name, phi in maps.items():
        cols = {"a": [], "b": [], "c": []}
        for i, p in enumerate(pts):
            try:
                ra, rb, rc = transform_residuals(metric, phi, p, tol.residual(cfg.derivative_mode),
                                                 cfg.derivative_mode)
                rows.append({"map": name, "index": i, "horizontal": ra, "nonlinear": rb, "vertical": rc})
            except (HypothesisError, FinslerError) as exc:
                ra = rb = rc = None
                rows.append({"map": name, "index": i, "error": f"{type(exc).__name__}: {exc}"})
            cols["a"].append(ra)
            cols["b"].append(rb)
            cols["c"].append(rc)
        for law, label in (("a", "horizontal"), ("b", "nonlinear"), ("c", "vertical")):
            preds.append(PredicateResult(f"transform_{name}_{label}", cols[law], 1e-6).to_dict())
    hyp = sum(1 for r in rows if "error" in r)
    return {"theorem": "transform", "rows": rows, "hypothesis_failures": hyp}, preds


def _verify_lemma(metric, plan, tol, cfg):
    from .classify import PredicateResult
    from .connections import PointTables, lemma_inner_residual, symmetric_product_residual

    li, ps = [], []
    for i, p in enumerate(plan.points(metric)):
        rng = np.random.default_rng([cfg.seed, i])
        try:
            T = PointTables(metric, p, order=2, mode=cfg.derivative_mode)
            a = b = 0.0
            for _ in range(4):
                V = rng.standard_normal(metric.n) + 1j * rng.standard_normal(metric.n)
                W = rng.standard_normal(metric.n) + 1j * rng.standard_normal(metric.n)
                a = max(a, lemma_inner_residual(T, V, W))
                b = max(b, symmetric_product_residual(T, V, W))
        except FinslerError:
            a = b = None
        li.append(a)
        ps.append(b)
    t = tol.identity_tol(cfg.derivative_mode)
    preds = [PredicateResult("lemma_inner", li, t, "identity").to_dict(),
             PredicateResult("symmetric_product", ps, t, "identity").to_dict()]
    return {"theorem": "lemma-inner", "max_residual": max(x for x in li + ps if x is not None)}, preds


COMMANDS = {"classify": cmd_classify, "curvature": cmd_curvature, "transport": cmd_transport,
            "verify": cmd_verify}


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)          # unknown flags -> exit 2
    start = time.perf_counter()
    try:
        cfg, tol = config_from_args(ns)
        metric = resolve_metric(cfg)
    except (ConfigError, ParamError, SyntaxError, IndexError, TypeError) as exc:
        print(f"kbfinsler: error: {exc}", file=sys.stderr)
        return 2
    try:
        doc, rows = COMMANDS[cfg.subcommand](cfg, tol, metric)
    except (FinslerError, ArithmeticError) as exc:
        print(f"kbfinsler: evaluation aborted: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    if cfg.json:
        write_report(doc, cfg.json)
    else:
        sys.stdout.write(dumps(doc))
    if rows is not None:
        write_csv(cfg.csv, *rows)
    print(f"kbfinsler: {cfg.subcommand} finished in {time.perf_counter() - start:.2f} s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
