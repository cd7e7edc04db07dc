"""Metric-class predicates, complex-structure parallelism residuals and equivalence checks.

Every predicate is a residual norm evaluated per sample; the verdict compares
the maximum over samples with a tolerance.  ``indeterminate`` means the
maximum lies within ten times the tolerance.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .connections import PointTables, lemma_inner_residual, symmetric_product_residual
from .errors import FinslerError
from .geometry import PointState

PREDICATES = (
    "strongly_convex", "strongly_pseudoconvex", "kahler_finsler", "weakly_kahler",
    "complex_berwald", "locally_minkowski", "kahler_berwald", "landsberg", "real_berwald",
    "hermitian_quadratic", "j_horizontal_parallel", "j_vertical_parallel", "h_j_invariant",
    "coincidence_horizontal", "coincidence_vertical", "coincidence_nonlinear",
)
IDENTITIES = (
    "euler_g", "euler_G", "euler_Gv", "hermitian_G", "spray_euler", "cartan_h_contraction",
    "cartan_v_contraction", "chern_h_contraction", "cartan_symmetry", "chern_v_symmetry",
    "n_symmetry", "lemma_inner", "symmetric_product",
)
FIBER_SAMPLES = 5


@dataclass(frozen=True)
class Tolerances:
    jet: float = 1e-7
    fd: float = 1e-4
    ode: float = 1e-6
    hsc: float = 1e-6
    identity: float = 1e-9

    def residual(self, mode):
        return self.jet if mode == "jet" else self.fd

    def identity_tol(self, mode):
        return self.identity if mode == "jet" else self.fd

    def to_dict(self):
        return {"jet": self.jet, "fd": self.fd, "ode": self.ode, "hsc": self.hsc, "identity": self.identity}


def verdict(max_residual, tol):
    if not np.isfinite(max_residual):
        return "indeterminate"
    if max_residual <= tol:
        return "holds"
    if max_residual <= 10 * tol:
        return "indeterminate"
    return "fails"


@dataclass
class PredicateResult:
    name: str
    residuals: list
    tolerance: float
    kind: str = "predicate"

    @property
    def max_residual(self):
        vals = [r for r in self.residuals if r is not None]
        return float(max(vals)) if vals else float("nan")

    @property
    def verdict(self):
        return verdict(self.max_residual, self.tolerance)

    @property
    def holds(self):
        return self.verdict == "holds"

    def to_dict(self):
        return {"name": self.name, "kind": self.kind, "tolerance": self.tolerance,
                "max_residual": self.max_residual, "verdict": self.verdict,
                "residuals": list(self.residuals)}


# ---------------------------------------------------------------------------
# single-point residuals

def _rel(lhs, rhs):
    lhs, rhs = np.asarray(lhs), np.asarray(rhs)
    return float(np.abs(lhs - rhs).max() / max(1.0, float(np.abs(rhs).max(initial=0.0))))


def _jpair_residual(table, n, lower_axes):
    """max |T^b_{a*..} + T^{b*}_{a..}|, |T^{b*}_{a*..} - T^b_{a..}| with one complexified lower slot."""
    b, bs = slice(0, n), slice(n, 2 * n)
    a, as_ = slice(0, n), slice(n, 2 * n)
    rest = (slice(None),) * (lower_axes - 1)
    r1 = table[(b, as_) + rest] + table[(bs, a) + rest]
    r2 = table[(bs, as_) + rest] - table[(b, a) + rest]
    return float(max(np.abs(r1).max(), np.abs(r2).max()))


def _tables(metric, p, mode="jet"):
    if isinstance(metric, PointTables):
        return metric
    return PointTables(metric, p, mode=mode)


def residual_J_horizontal(metric, p=None, mode="jet"):
    T = _tables(metric, p, mode)
    return _jpair_residual(T.cartan.horizontal, T.n, 2)


def residual_J_vertical(metric, p=None, mode="jet"):
    T = _tables(metric, p, mode)
    return _jpair_residual(T.cartan.vertical, T.n, 2)


def residual_H_J_invariance(metric, p=None, mode="jet"):
    T = _tables(metric, p, mode)
    return _jpair_residual(T.spray.nonlinear, T.n, 1)


def residual_connection_coincidence(metric, p=None, mode="jet"):
    """(horizontal, vertical, nonlinear) max deviations between Chern-Finsler and complexified Cartan data."""
    T = _tables(metric, p, mode)
    ch, N = T.chern, T.n_coeffs
    return (float(np.abs(ch.horizontal - N.horizontal).max()),
            float(np.abs(ch.vertical - N.vertical).max()),
            float(np.abs(ch.nonlinear - N.nonlinear).max()))


def kahler_residual(T):
    h = T.chern.horizontal
    return float(np.abs(h - h.transpose(0, 2, 1)).max())


def weakly_kahler_residual(T):
    """|G_a (H^a_{b;m} - H^a_{m;b}) v^b|, scaled so that it never exceeds the Kahler residual."""
    h = T.chern.horizontal
    Ga = T.fundamental_complex.G_v
    v = T.p.v
    d = np.einsum("a,abm,b->m", Ga, h - h.transpose(0, 2, 1), v)
    return float(np.abs(d).max() / (np.abs(Ga).sum() * np.abs(v).sum()))


def identity_residuals(T, rng=None, pairs=4):
    """Relative residuals of the homogeneity/contraction identities and the inner-product lemmas."""
    from .calculus import wirtinger_grad

    n, p = T.n, T.p
    y, v = p.y, p.v
    F2 = float(T.F2.value)
    fr, fc = T.fundamental_real, T.fundamental_complex
    sp, ca, ch, N = T.spray, T.cartan, T.chern, T.n_coeffs
    out = {
        "euler_g": _rel(y @ fr.g @ y, F2),
        "euler_G": _rel(v @ fc.G @ np.conj(v), F2),
        "euler_Gv": _rel(fc.G_v @ v, F2),
        "hermitian_G": _rel(fc.G, fc.G.conj().T),
        "spray_euler": _rel(sp.nonlinear @ y, 2 * sp.spray),
        "cartan_h_contraction": _rel(np.einsum("klj,l->kj", ca.horizontal, y), sp.nonlinear),
        "cartan_v_contraction": _rel(np.einsum("kjl,j->kl", ca.vertical, y), 0.0),
        "chern_h_contraction": _rel(np.einsum("abm,b->am", ch.horizontal, v), ch.nonlinear),
        "cartan_symmetry": max(_rel(ca.horizontal, ca.horizontal.transpose(0, 2, 1)),
                               _rel(ca.vertical, ca.vertical.transpose(0, 2, 1))),
        "chern_v_symmetry": _rel(ch.vertical, ch.vertical.transpose(0, 2, 1)),
        "n_symmetry": max(_rel(N.horizontal, N.horizontal.transpose(0, 2, 1)),
                          _rel(N.vertical, N.vertical.transpose(0, 2, 1))),
    }
    rng = rng or np.random.default_rng(0)
    li, ps = 0.0, 0.0
    for _ in range(pairs):
        V = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        W = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        li = max(li, lemma_inner_residual(T, V, W))
        ps = max(ps, symmetric_product_residual(T, V, W))
    out["lemma_inner"] = li
    out["symmetric_product"] = ps
    return out


def _fiber_vectors(p, rng, count=FIBER_SAMPLES):
    """The sample's own fiber vector plus ``count - 1`` random ones at the same base point."""
    n = p.n
    vs = [p.v]
    for _ in range(count - 1):
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        vs.append(w / np.linalg.norm(w) * rng.uniform(0.5, 2.0))
    return vs


def _pairwise(arrays):
    return float(max((np.abs(a - b).max() for i, a in enumerate(arrays) for b in arrays[i + 1:]), default=0.0))


def sample_residuals(metric, p, mode="jet", rng=None):
    """Every predicate residual and identity residual at one sample point."""
    from .calculus import wirtinger_grad

    rng = rng or np.random.default_rng(0)
    T = PointTables(metric, p, mode=mode)
    n = T.n
    fr, fc = T.fundamental_real, T.fundamental_complex
    res = {
        "strongly_convex": -fr.min_eigenvalue,
        "strongly_pseudoconvex": -fc.min_eigenvalue,
        "kahler_finsler": kahler_residual(T),
        "weakly_kahler": weakly_kahler_residual(T),
    }
    dH_v = wirtinger_grad(T.chern_h_jet, n, 1).value
    dH_vb = wirtinger_grad(T.chern_h_jet, n, 1, bar=True).value
    dH_z = wirtinger_grad(T.chern_h_jet, n, 0).value
    dH_zb = wirtinger_grad(T.chern_h_jet, n, 0, bar=True).value

    fibers = [T] + [PointTables(metric, PointState.from_complex(p.z, w), mode=mode)
                    for w in _fiber_vectors(p, rng)[1:]]
    res["complex_berwald"] = max(float(np.abs(dH_v).max()), float(np.abs(dH_vb).max()),
                                 _pairwise([F.chern.horizontal for F in fibers]))
    res["locally_minkowski"] = max(float(np.abs(dH_z).max()), float(np.abs(dH_zb).max()))
    res["kahler_berwald"] = max(res["kahler_finsler"], res["complex_berwald"])
    res["landsberg"] = float(np.abs(T.berwald.landsberg).max())
    res["real_berwald"] = _pairwise([F.berwald.berwald for F in fibers])
    dG = wirtinger_grad(T.G_jet, n, 1).value
    res["hermitian_quadratic"] = max(float(np.abs(dG).max()),
                                     _pairwise([F.fundamental_complex.G for F in fibers]))
    res["j_horizontal_parallel"] = residual_J_horizontal(T)
    res["j_vertical_parallel"] = residual_J_vertical(T)
    res["h_j_invariant"] = residual_H_J_invariance(T)
    h, v, nl = residual_connection_coincidence(T)
    res["coincidence_horizontal"], res["coincidence_vertical"], res["coincidence_nonlinear"] = h, v, nl
    res.update(identity_residuals(T, rng))
    return res


# ---------------------------------------------------------------------------
# batch classification

def threads():
    try:
        return max(1, int(os.environ.get("FINSLER_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """Map preserving input order, optionally over a thread pool capped by FINSLER_THREADS."""
    items = list(items)
    k = threads()
    if k <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


@dataclass
class ClassificationReport:
    metric: dict
    plan: dict
    mode: str
    tolerances: dict
    predicates: list
    skipped: list = field(default_factory=list)
    implications: list = field(default_factory=list)

    def get(self, name):
        for r in self.predicates:
            if r.name == name:
                return r
        raise KeyError(name)

    def verdicts(self):
        return {r.name: r.verdict for r in self.predicates}

    def to_dict(self):
        return {"metric": self.metric, "plan": self.plan, "mode": self.mode, "tolerances": self.tolerances,
                "predicates": [r.to_dict() for r in self.predicates],
                "skipped": self.skipped, "implications": self.implications}


def _sample_job(metric, mode, seed):
    def job(item):
        i, p = item
        rng = np.random.default_rng([seed, i])
        try:
            return sample_residuals(metric, p, mode, rng), None
        except FinslerError as exc:
            return None, {"index": i, "error": f"{type(exc).__name__}: {exc}"}
    return job


def classify(metric, plan, tolerances=None, mode="jet", points=None):
    from .metrics import SamplePlan

    tolerances = tolerances or Tolerances()
    plan = plan or SamplePlan()
    pts = plan.points(metric) if points is None else points
    outcomes = ordered_map(_sample_job(metric, mode, plan.seed), list(enumerate(pts)))
    skipped = [err for _, err in outcomes if err is not None]
    rows = [res for res, _ in outcomes]
    tol = tolerances.residual(mode)
    tol_id = tolerances.identity_tol(mode)

    def col(name):
        return [None if r is None else float(r[name]) for r in rows]

    preds = []
    for name in PREDICATES:
        t = 0.0 if name.startswith("strongly") else tol
        preds.append(PredicateResult(name, col(name), t))
    for name in IDENTITIES:
        preds.append(PredicateResult(name, col(name), tol_id, kind="identity"))
    report = ClassificationReport(metric.identity(), plan.to_dict(), mode, tolerances.to_dict(), preds, skipped)
    report.implications = implication_checks(report)
    return report


def implication_checks(report):
    """Sample-wise implications that must hold whatever the metric."""
    checks = []

    def implies(a, b, label):
        ra, rb = report.get(a), report.get(b)
        bad = [i for i, (x, y) in enumerate(zip(ra.residuals, rb.residuals))
               if x is not None and y is not None and x <= ra.tolerance and y > rb.tolerance]
        checks.append({"name": label, "holds": not bad, "violations": bad})

    implies("kahler_finsler", "weakly_kahler", "kahler_finsler => weakly_kahler")
    implies("j_horizontal_parallel", "h_j_invariant", "J horizontal parallel => H J-invariant")
    implies("kahler_berwald", "landsberg", "kahler_berwald => landsberg")
    return checks


# ---------------------------------------------------------------------------
# theorem-level equivalences

def _leg(res, tol):
    return res is not None and res <= tol


def verify_equivalences(metric, plan, tolerances=None, mode="jet", report=None,
                        transport_samples=8, ode_steps=200, length=0.5):
    """Two-way implications at the residual level, per sample.

    Check A legs: (J horizontal and vertical parallel) <=> (all connection coincidence residuals small).
    Check B legs: Kahler-Berwald <=> J horizontal parallel <=> type preservation under transport;
    the transport leg is evaluated on the first ``transport_samples`` samples and only when the
    weakly Kahler predicate holds.
    """
    from .transport import Curve, type_preservation_residual

    tolerances = tolerances or Tolerances()
    report = report or classify(metric, plan, tolerances, mode)
    tol = tolerances.residual(mode)
    pts = plan.points(metric)
    R = {r.name: r.residuals for r in report.predicates}
    weak = report.get("weakly_kahler").holds

    def transport_leg(i):
        p = pts[i]
        y = p.y / np.sqrt(metric.f2(p.z, p.v))
        try:
            return type_preservation_residual(metric, Curve.geodesic(p.x, y, length), p.v, ode_steps)
        except FinslerError:
            return None

    idx = list(range(min(transport_samples, len(pts)))) if weak else []
    tres = dict(zip(idx, ordered_map(transport_leg, idx)))

    rows = []
    for i in range(len(pts)):
        if R["kahler_berwald"][i] is None:
            continue
        jh = _leg(R["j_horizontal_parallel"][i], tol)
        jv = _leg(R["j_vertical_parallel"][i], tol)
        coin = all(_leg(R[k][i], tol) for k in ("coincidence_horizontal", "coincidence_vertical",
                                                 "coincidence_nonlinear"))
        kb = _leg(R["kahler_berwald"][i], tol)
        row = {"index": i, "kahler_berwald": kb, "j_horizontal": jh, "j_vertical": jv,
               "coincidence": coin, "theorem_A_consistent": (jh and jv) == coin}
        legs = [kb, jh]
        if i in tres:
            tp = tres[i]
            row["type_preservation_residual"] = tp
            row["transport"] = _leg(tp, tolerances.ode)
            legs.append(row["transport"])
        row["theorem_B_consistent"] = len(set(legs)) == 1
        rows.append(row)
    a_ok = all(r["theorem_A_consistent"] for r in rows)
    b_ok = all(r["theorem_B_consistent"] for r in rows)
    return {
        "metric": metric.identity(), "samples": len(rows), "mode": mode,
        "weakly_kahler": weak, "transport_samples": len(tres),
        "theorem_A": {"consistent": a_ok, "label": f"consistent with theorem at {len(rows)} samples" if a_ok
                      else "violated"},
        "theorem_B": {"consistent": b_ok, "label": f"consistent with theorem at {len(rows)} samples" if b_ok
                      else "violated"},
        "rows": rows,
    }
