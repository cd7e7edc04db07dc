"""Holomorphic sectional curvature, the A-tensor, Ricci contraction and Kahler-Einstein residual."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calculus import wirtinger_grad
from .connections import PointTables
from .errors import FinslerError, ParamError

# Label attached to curvature values: the z-bar derivative of the complex
# nonlinear connection is the plain chart partial at fixed v.
HSC_CONVENTION = "plain z-bar partial at fixed v of the Chern coefficient contraction"


def _tables(metric_or_tables, p=None, mode="jet", order=4):
    if isinstance(metric_or_tables, PointTables):
        return metric_or_tables
    return PointTables(metric_or_tables, p, order=order, mode=mode)


def hsc_complex(T):
    """Uncast contraction -2 G_a dN^a_m/dzbar^n v^m vbar^n / G^2 (complex for diagnostics)."""
    n = T.n
    d = wirtinger_grad(T.chern_nl_jet, n, 0, bar=True).value      # [a, m, nu]
    v = T.p.v
    Ga = T.Gv_jet.value
    F2 = float(T.F2.value)
    num = -2.0 * np.einsum("a,amn,m,n->", Ga, d, v, np.conj(v))
    return complex(num / F2 ** 2)


def hsc(metric, p=None, mode="jet"):
    """Holomorphic sectional curvature along v at z (real part of the contraction)."""
    return hsc_complex(_tables(metric, p, mode, order=3)).real


def a_tensor(metric, p=None, mode="jet"):
    """A[a, b, m, nu] = -d(Chern horizontal)^a_{b;m} / dzbar^nu."""
    T = _tables(metric, p, mode, order=4)
    return -wirtinger_grad(T.chern_h_jet, T.n, 0, bar=True).value


def ricci(A):
    return np.einsum("aamn->mn", A)


def ricci_and_ke_residual(metric, p=None, c=None, mode="jet"):
    """Ricci contraction and max |G - 4/(c(n+1)) Ric|."""
    if c is None or c == 0:
        raise ParamError("the Kahler-Einstein residual needs a nonzero curvature constant c")
    T = _tables(metric, p, mode, order=4)
    A = a_tensor(T)
    ric = ricci(A)
    G = T.fundamental_complex.G
    res = float(np.abs(G - 4.0 / (c * (T.n + 1)) * ric).max())
    return ric, res


def a_contraction_residual(T, c):
    """|2 A^a_{b;m nubar} v^b v^m vbar^nu - c F^2 v^a|, relative to max(1, |c F^2 v|)."""
    A = a_tensor(T)
    v = T.p.v
    lhs = 2.0 * np.einsum("abmn,b,m,n->a", A, v, v, np.conj(v))
    rhs = c * float(T.F2.value) * v
    return float(np.abs(lhs - rhs).max() / max(1.0, np.abs(rhs).max()))


def a_symmetry_residual(A):
    return float(np.abs(A - A.transpose(0, 2, 1, 3)).max())


@dataclass
class CurvatureSample:
    index: int
    z: np.ndarray
    v: np.ndarray
    hsc: float = float("nan")
    hsc_imag: float = float("nan")
    ke_residual: float | None = None
    error: str | None = None


@dataclass
class HscScan:
    metric: dict
    samples: list
    tol: float
    convention: str = HSC_CONVENTION
    extra: dict = field(default_factory=dict)

    @property
    def values(self):
        return np.array([s.hsc for s in self.samples if s.error is None])

    @property
    def stats(self):
        h = self.values
        if h.size == 0:
            return {"min": None, "max": None, "mean": None, "std": None, "spread": None, "count": 0}
        return {"min": float(h.min()), "max": float(h.max()), "mean": float(h.mean()),
                "std": float(h.std()), "spread": float(h.max() - h.min()), "count": int(h.size)}

    @property
    def constant(self):
        h = self.values
        return bool(h.size and (h.max() - h.min()) <= self.tol)

    @property
    def failures(self):
        return sum(1 for s in self.samples if s.error is not None)


def curvature_sample(metric, p, index=0, c=None, mode="jet"):
    rec = CurvatureSample(index, p.z, p.v)
    try:
        T = PointTables(metric, p, order=4 if c else 3, mode=mode)
        h = hsc_complex(T)
        rec.hsc, rec.hsc_imag = h.real, abs(h.imag)
        if c:
            rec.ke_residual = ricci_and_ke_residual(T, c=c)[1]
    except FinslerError as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def constant_hsc_scan(metric, plan, tol=1e-6, mode="jet", ke_constant=None, mapper=map):
    """hsc statistics over a sample plan; optionally the Kahler-Einstein residual for a given c."""
    pts = plan.points(metric)
    samples = list(mapper(lambda ip: curvature_sample(metric, ip[1], ip[0], ke_constant, mode),
                          list(enumerate(pts))))
    return HscScan(metric.identity(), samples, tol)
