"""Metric definitions, the built-in catalog, sampling plans and admissibility checks.

An evaluator receives ``z`` and ``v`` as lists of length ``n`` whose entries
are complex jets or complex numpy arrays, and returns F^2 built from the
generic primitives in :mod:`kbfinsler.jets` (``abs2``, ``sqrt``, ``power``...).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, FinslerError, ParamError
from .geometry import PointState
from .jets import Jet, abs2, conj, power, sqrt


@dataclass(frozen=True, eq=False)
class MetricDefinition:
    n: int
    evaluator: Callable
    label: str
    params: dict = field(default_factory=dict)
    domain: Callable | None = None
    sample_radius: float = 0.7
    provenance: str = ""

    def domain_ok(self, z, v) -> bool:
        """Domain predicate on complex arrays of shape (n,) or (n, m)."""
        if self.domain is None:
            return True
        return bool(np.all(self.domain(np.asarray(z), np.asarray(v))))

    def check_domain(self, p: PointState):
        if p.n != self.n:
            raise DomainError(f"{self.label} has n={self.n}, point has n={p.n}")
        if not self.domain_ok(p.z, p.v):
            raise DomainError(f"{self.label}: point z={p.z} outside the smoothness domain")

    def f2(self, z, v) -> float:
        """Plain evaluation of F^2 (no derivatives)."""
        z = np.asarray(z, dtype=complex)
        v = np.asarray(v, dtype=complex)
        if not self.domain_ok(z, v):
            raise DomainError(f"{self.label}: z={z} outside the smoothness domain")
        out = complex(np.asarray(self.evaluator(list(z), list(v))))
        return out.real

    def f2_complex(self, z, v) -> complex:
        z = np.asarray(z, dtype=complex)
        v = np.asarray(v, dtype=complex)
        return complex(np.asarray(self.evaluator(list(z), list(v))))

    def identity(self):
        return {"metric": self.label, "n": self.n, "params": dict(self.params)}


# ---------------------------------------------------------------------------
# helpers shared by the catalog and the DSL

def norm2(w):
    out = abs2(w[0])
    for x in w[1:]:
        out = out + abs2(x)
    return out


def herm(z, v):
    """<z, v> = sum z^a conj(v^a)."""
    out = z[0] * conj(v[0])
    for a in range(1, len(z)):
        out = out + z[a] * conj(v[a])
    return out


def _ball(radius=1.0):
    def pred(z, v):
        return np.sum(np.abs(z) ** 2, axis=0) < radius ** 2
    return pred


def _polydisk(z, v):
    return np.all(np.abs(z) < 1.0, axis=0)


def _check_n(n, lo=1):
    if not isinstance(n, (int, np.integer)) or n < lo:
        raise ParamError(f"n must be an integer >= {lo}, got {n!r}")


def _check_tk(t, k):
    if not np.isfinite(t) or t < 0:
        raise ParamError(f"t must be >= 0, got {t!r}")
    if not float(k).is_integer() or k < 2:
        raise ParamError(f"k must be an integer >= 2, got {k!r}")


# ---------------------------------------------------------------------------
# catalog constructors

def make_euclidean(n=2):
    _check_n(n)

    def ev(z, v):
        return norm2(v)

    return MetricDefinition(n, ev, "euclidean", {"n": n}, provenance="baseline flat fixture")


def make_minkowski_tk(n=2, t=0.5, k=2):
    _check_n(n, 2)
    _check_tk(t, k)
    k = int(k)
    t = float(t)

    def ev(z, v):
        s = power(abs2(v[0]), k)
        for a in range(1, n):
            s = s + power(abs2(v[a]), k)
        return norm2(v) + t * sqrt(s)

    return MetricDefinition(n, ev, "minkowski_tk", {"n": n, "t": t, "k": k},
                            provenance="strongly convex complex Minkowski norm sum|v|^2 + t sqrt(sum|v|^2k)")


def make_bergman_ball(n=2, c=-4.0):
    _check_n(n)
    if not np.isfinite(c) or c >= 0:
        raise ParamError(f"c must be negative for the ball, got {c!r}")
    c = float(c)

    def ev(z, v):
        r = 1.0 - norm2(z)
        return (-4.0 / c) * (r * norm2(v) + abs2(herm(z, v))) / (r * r)

    return MetricDefinition(n, ev, "bergman", {"n": n, "c": c}, domain=_ball(),
                            provenance="multiple of the Bergman metric of the unit ball")


def make_fubini_study(n=2, c=4.0):
    _check_n(n)
    if not np.isfinite(c) or c <= 0:
        raise ParamError(f"c must be positive for projective space, got {c!r}")
    c = float(c)

    def ev(z, v):
        r = 1.0 + norm2(z)
        return (4.0 / c) * (r * norm2(v) - abs2(herm(z, v))) / (r * r)

    return MetricDefinition(n, ev, "fubini_study", {"n": n, "c": c}, sample_radius=1.0,
                            provenance="multiple of the Fubini-Study metric in an affine chart")


def make_hermitian_nonkahler():
    def ev(z, v):
        return (1.0 + abs2(z[1])) * abs2(v[0]) + abs2(v[1])

    return MetricDefinition(2, ev, "hermitian_nonkahler", {"n": 2},
                            provenance="Hermitian-quadratic fixture with non-closed Kahler form")


def make_polydisk_tk(n=2, t=0.5, k=2):
    _check_n(n)
    _check_tk(t, k)
    k = int(k)
    t = float(t)

    def ev(z, v):
        w = [abs2(v[a]) / power(1.0 - abs2(z[a]), 2) for a in range(n)]
        quad = w[0]
        s = power(w[0], k)
        for a in range(1, n):
            quad = quad + w[a]
            s = s + power(w[a], k)
        return quad + t * sqrt(s)

    return MetricDefinition(n, ev, "polydisk_tk", {"n": n, "t": t, "k": k}, domain=_polydisk,
                            provenance="product Poincare weights fed into the Minkowski t,k norm")


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    constructor: Callable
    params: tuple
    schema: str
    provenance: str


CATALOG = {
    "euclidean": CatalogEntry("euclidean", make_euclidean, ("n",), "n>=1", "flat baseline"),
    "minkowski_tk": CatalogEntry("minkowski_tk", make_minkowski_tk, ("n", "t", "k"),
                                 "n>=2, t>=0, integer k>=2", "complex Minkowski norm"),
    "bergman": CatalogEntry("bergman", make_bergman_ball, ("n", "c"), "c<0", "ball, constant hsc c"),
    "fubini_study": CatalogEntry("fubini_study", make_fubini_study, ("n", "c"), "c>0",
                                 "projective space, constant hsc c"),
    "hermitian_nonkahler": CatalogEntry("hermitian_nonkahler", make_hermitian_nonkahler, (),
                                        "n=2 fixed", "non-Kahler Hermitian fixture"),
    "polydisk_tk": CatalogEntry("polydisk_tk", make_polydisk_tk, ("n", "t", "k"),
                                "t>=0, integer k>=2", "bidisk stress case"),
}
ALIASES = {"bergman_ball": "bergman"}

DEFAULTS = {"n": 2, "t": 0.5, "k": 2}
DEFAULT_C = {"bergman": -4.0, "fubini_study": 4.0}


def make_metric(name, **params):
    """Build a catalog metric; ``None`` parameters fall back to defaults."""
    key = ALIASES.get(name, name)
    if key not in CATALOG:
        raise ParamError(f"unknown metric {name!r}; choose from {sorted(CATALOG)}")
    entry = CATALOG[key]
    kwargs = {}
    for p in entry.params:
        val = params.get(p)
        if val is None:
            val = DEFAULT_C[key] if p == "c" else DEFAULTS[p]
        kwargs[p] = val
    return entry.constructor(**kwargs)


# ---------------------------------------------------------------------------
# sampling

@dataclass(frozen=True)
class SamplePlan:
    count: int = 32
    seed: int = 42
    radius: float | None = None
    v_scale: tuple = (0.5, 2.0)

    def points(self, metric):
        """Deterministic sample points; a longer plan extends a shorter one."""
        rng = np.random.default_rng(self.seed)
        n = metric.n
        r = metric.sample_radius if self.radius is None else self.radius
        out = []
        for _ in range(self.count):
            d = rng.standard_normal(2 * n)
            x = d / np.linalg.norm(d) * r * rng.uniform() ** (1.0 / (2 * n))
            e = rng.standard_normal(2 * n)
            y = e / np.linalg.norm(e) * rng.uniform(*self.v_scale)
            out.append(PointState(x, y))
        return out

    def to_dict(self):
        return {"count": self.count, "seed": self.seed, "radius": self.radius, "v_scale": list(self.v_scale)}


# ---------------------------------------------------------------------------
# admissibility

@dataclass
class SampleCheck:
    index: int
    f2: float = float("nan")
    reality: float = float("nan")
    homogeneity: float = float("nan")
    min_eig_g: float = float("nan")
    min_eig_G: float = float("nan")
    cond_g: float = float("nan")
    cond_G: float = float("nan")
    euler: float = float("nan")
    error: str | None = None

    @property
    def ok(self):
        return (self.error is None and self.f2 > 0 and self.reality <= 1e-12
                and self.homogeneity <= 1e-10 and self.min_eig_g > 0 and self.min_eig_G > 0
                and self.euler <= 1e-9)


@dataclass
class AdmissibilityReport:
    metric: dict
    plan: dict
    samples: list

    @property
    def admissible(self):
        return all(s.ok for s in self.samples)

    @property
    def min_eig_g(self):
        return float(np.nanmin([s.min_eig_g for s in self.samples]))

    @property
    def min_eig_G(self):
        return float(np.nanmin([s.min_eig_G for s in self.samples]))

    @property
    def max_condition(self):
        return float(np.nanmax([max(s.cond_g, s.cond_G) for s in self.samples]))

    @property
    def failures(self):
        return [s for s in self.samples if not s.ok]


def _check_point(metric, p, i, lambdas):
    from .calculus import metric_jet, wirtinger_grad

    rec = SampleCheck(i)
    try:
        val = metric.f2_complex(p.z, p.v)
        rec.f2 = val.real
        scale = max(abs(val.real), 1e-300)
        rec.reality = abs(val.imag) / scale
        rec.homogeneity = max(
            abs(metric.f2(p.z, lam * p.v) - abs(lam) ** 2 * val.real) / (abs(lam) ** 2 * scale)
            for lam in lambdas)
        if rec.reality > 1e-12:
            rec.error = "evaluator is not real-valued"
            return rec
        jet = metric_jet(metric, p, order=2)
        n = p.n
        gy = jet.gradient(range(2 * n, 4 * n))
        g = 0.5 * gy.gradient(range(2 * n, 4 * n)).value
        G = wirtinger_grad(wirtinger_grad(jet, n, 1), n, 1, bar=True).value
        Gv = wirtinger_grad(jet, n, 1).value
        eg = np.linalg.eigvalsh(0.5 * (g + g.T))
        eG = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
        rec.min_eig_g, rec.min_eig_G = float(eg[0]), float(eG[0])
        rec.cond_g = float(eg[-1] / eg[0]) if eg[0] > 0 else float("inf")
        rec.cond_G = float(eG[-1] / eG[0]) if eG[0] > 0 else float("inf")
        y, v = p.y, p.v
        rec.euler = max(abs(y @ g @ y - val.real), abs(v @ G @ v.conj() - val.real),
                        abs(Gv @ v - val.real)) / scale
    except (FinslerError, ArithmeticError, ValueError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def validate(metric, plan=None, points=None):
    """Admissibility report over a sample plan; mathematical failures are recorded, not raised."""
    plan = plan or SamplePlan()
    pts = plan.points(metric) if points is None else points
    rng = np.random.default_rng(plan.seed + 1)
    lambdas = [2.0, 0.3, 2j, complex(*rng.uniform(-2, 2, 2))]
    samples = [_check_point(metric, p, i, lambdas) for i, p in enumerate(pts)]
    return AdmissibilityReport(metric.identity(), plan.to_dict(), samples)
