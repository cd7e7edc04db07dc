"""Coefficient tables of the real (Cartan) and complex (Chern-Finsler) connections.

Everything at a point is derived from one jet of F^2 seeded in all ``4n`` real
coordinates (``x`` first, then ``y``).  Arrays are indexed upper index first,
then lower indices in the order they appear in the symbol, e.g.

* ``nonlinear[k, j]``          real nonlinear connection (d spray^k / dy^j)
* ``cartan_h[k, j, l]``        horizontal Cartan coefficients, lower pair (j; l)
* ``chern_h[a, b, m]``         horizontal Chern-Finsler coefficients, lower pair (b; m)
* ``chern_nl[a, m]``           complex nonlinear connection (a; m)

Real indices run over ``0..2n-1`` with the starred partner of ``a`` at ``a+n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .calculus import fd_jet, metric_jet, wirtinger_grad
from .errors import SingularMetricError
from .jets import MAX_ORDER, Jet, jeinsum, jinv, stack

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class FundamentalReal:
    g: np.ndarray
    g_inv: np.ndarray
    condition: float
    min_eigenvalue: float


@dataclass(frozen=True)
class FundamentalComplex:
    G: np.ndarray          # G[a, b] = d^2 F^2 / dv^a dvbar^b
    G_inv: np.ndarray      # G_inv[a, t] is the inverse with G_inv[a, t] G[b, t] = delta
    G_v: np.ndarray        # dF^2 / dv^a
    F2: float
    condition: float
    min_eigenvalue: float


@dataclass(frozen=True)
class SprayTable:
    spray: np.ndarray
    nonlinear: np.ndarray
    complex_spray: np.ndarray
    half_chern_contraction: np.ndarray


@dataclass(frozen=True)
class CartanTable:
    horizontal: np.ndarray
    vertical: np.ndarray


@dataclass(frozen=True)
class ChernTable:
    nonlinear: np.ndarray
    horizontal: np.ndarray
    vertical: np.ndarray


@dataclass(frozen=True)
class BerwaldTable:
    berwald: np.ndarray
    landsberg: np.ndarray


@dataclass(frozen=True)
class NTable:
    nonlinear: np.ndarray
    horizontal: np.ndarray
    vertical: np.ndarray


def _to_n(real_table, n):
    """Complexify the upper index: T[b] + i T[b+n] for b < n, lower real indices cut to 0..n-1."""
    up = real_table[:n] + 1j * real_table[n:2 * n]
    idx = (slice(None),) + (slice(0, n),) * (real_table.ndim - 1)
    return up[idx]


class PointTables:
    """All coefficient tables at one point, derived lazily from a single F^2 jet.

    ``mode`` is ``"jet"`` (forward-mode jets) or ``"fd"`` (jet assembled from
    finite differences, the oracle path).
    """

    def __init__(self, metric, p, order=MAX_ORDER, mode="jet", max_condition=MAX_CONDITION):
        self.metric = metric
        self.p = p
        self.n = p.n
        self.max_condition = max_condition
        self.mode = mode
        if mode == "jet":
            self.F2 = metric_jet(metric, p, order)
        elif mode in ("fd", "fd-oracle"):
            self.F2 = fd_jet(metric, p, order)
        else:
            raise ValueError(f"unknown derivative mode {mode!r}")
        n = self.n
        self._xs = range(2 * n)
        self._ys = range(2 * n, 4 * n)

    # -- real side --------------------------------------------------------
    @cached_property
    def Y(self):
        n, K = self.n, self.F2.order
        return stack([Jet.variable(self.p.y[a], 2 * n + a, 4 * n, K) for a in range(2 * n)])

    @cached_property
    def g_jet(self):
        return self.F2.gradient(self._ys).gradient(self._ys) * 0.5

    @cached_property
    def _g_inverse(self):
        g0 = self.g_jet.value
        eig = np.linalg.eigvalsh(0.5 * (g0 + g0.T))
        if eig[0] <= 0:
            raise SingularMetricError(f"real fundamental tensor not positive definite (min eig {eig[0]:.3g})",
                                      min_eigenvalue=float(eig[0]))
        try:
            inv, cond = jinv(self.g_jet, self.max_condition)
        except SingularMetricError as exc:
            raise SingularMetricError(str(exc), min_eigenvalue=float(eig[0]), condition=exc.condition) from None
        return inv, cond, float(eig[0])

    @property
    def g_inv_jet(self):
        return self._g_inverse[0]

    @cached_property
    def spray_jet(self):
        F2 = self.F2
        dx = F2.gradient(self._xs)
        hxy = dx.gradient(self._ys)
        term = jeinsum("al,a->l", hxy, self.Y) - dx
        return jeinsum("kl,l->k", self.g_inv_jet, term) * 0.25

    @cached_property
    def nonlinear_jet(self):
        return self.spray_jet.gradient(self._ys)

    def delta(self, T):
        """Adapted horizontal derivative: new last axis l, d/dx^l - N^m_l d/dy^m."""
        tx = T.gradient(self._xs)
        ty = T.gradient(self._ys)
        sub = "".join("abcdefgh"[: len(T.shape)])
        return tx - jeinsum(f"{sub}m,ml->{sub}l", ty, self.nonlinear_jet)

    @cached_property
    def cartan_h_jet(self):
        dg = self.delta(self.g_jet)                  # dg[s, j, l] = delta_l g_sj
        comb = dg - dg.transpose(2, 0, 1) + dg.transpose(1, 2, 0)
        # comb[s,j,l] = dg[s,j,l] - dg[j,l,s] + dg[l,s,j]
        return jeinsum("ks,sjl->kjl", self.g_inv_jet, comb) * 0.5

    @cached_property
    def cartan_v_jet(self):
        dg = self.g_jet.gradient(self._ys)           # dg[j, s, l] = d g_js / dy^l
        return jeinsum("ks,jsl->kjl", self.g_inv_jet, dg) * 0.5

    @cached_property
    def berwald_jet(self):
        return self.nonlinear_jet.gradient(self._ys)

    # -- complex side -----------------------------------------------------
    @cached_property
    def Gv_jet(self):
        return wirtinger_grad(self.F2, self.n, 1)

    @cached_property
    def G_jet(self):
        return wirtinger_grad(self.Gv_jet, self.n, 1, bar=True)

    @cached_property
    def _G_inverse(self):
        G0 = self.G_jet.value
        eig = np.linalg.eigvalsh(0.5 * (G0 + G0.conj().T))
        if eig[0] <= 0:
            raise SingularMetricError(f"complex fundamental tensor not positive definite (min eig {eig[0]:.3g})",
                                      min_eigenvalue=float(eig[0]))
        try:
            inv, cond = jinv(self.G_jet, self.max_condition)
        except SingularMetricError as exc:
            raise SingularMetricError(str(exc), min_eigenvalue=float(eig[0]), condition=exc.condition) from None
        # G inv satisfies G @ inv = I; the upper-index tensor is its transpose
        return inv.transpose(), cond, float(eig[0])

    @property
    def G_up_jet(self):
        """G_up[a, t] with sum_t G_up[a, t] G[b, t] = delta_ab."""
        return self._G_inverse[0]

    @cached_property
    def chern_nl_jet(self):
        b = wirtinger_grad(wirtinger_grad(self.F2, self.n, 0), self.n, 1, bar=True)   # b[m, t]
        return jeinsum("at,mt->am", self.G_up_jet, b)

    @cached_property
    def _dG(self):
        n = self.n
        return wirtinger_grad(self.G_jet, n, 0), wirtinger_grad(self.G_jet, n, 1)

    @cached_property
    def chern_h_jet(self):
        dz, dv = self._dG                             # [b, t, m], [b, t, c]
        d = dz - jeinsum("btc,cm->btm", dv, self.chern_nl_jet)
        return jeinsum("at,btm->abm", self.G_up_jet, d)

    @cached_property
    def chern_v_jet(self):
        return jeinsum("at,btc->abc", self.G_up_jet, self._dG[1])

    @cached_property
    def G_sym_jet(self):
        return wirtinger_grad(self.Gv_jet, self.n, 1)

    # -- value tables -----------------------------------------------------
    @cached_property
    def fundamental_real(self):
        inv, cond, lo = self._g_inverse
        return FundamentalReal(self.g_jet.value, inv.value, cond, lo)

    @cached_property
    def fundamental_complex(self):
        inv, cond, lo = self._G_inverse
        return FundamentalComplex(self.G_jet.value, inv.value, self.Gv_jet.value,
                                  float(self.F2.value), cond, lo)

    @cached_property
    def spray(self):
        n = self.n
        s = self.spray_jet.value
        half = 0.5 * self.chern.nonlinear @ self.p.v
        return SprayTable(s, self.nonlinear_jet.value, s[:n] + 1j * s[n:], half)

    @cached_property
    def cartan(self):
        return CartanTable(self.cartan_h_jet.value, self.cartan_v_jet.value)

    @cached_property
    def cartan_tensor(self):
        """C_jkl = (1/4) d^3 F^2 / dy^j dy^k dy^l."""
        return 0.5 * self.g_jet.gradient(self._ys).value

    @cached_property
    def chern(self):
        return ChernTable(self.chern_nl_jet.value, self.chern_h_jet.value, self.chern_v_jet.value)

    @cached_property
    def berwald(self):
        b = self.berwald_jet.value
        return BerwaldTable(b, b - self.cartan.horizontal)

    @cached_property
    def n_coeffs(self):
        n = self.n
        return NTable(_to_n(self.spray.nonlinear, n), _to_n(self.cartan.horizontal, n),
                      _to_n(self.cartan.vertical, n))

    @property
    def G_sym(self):
        return self.G_sym_jet.value


def tables(metric, p, mode="jet", order=MAX_ORDER):
    return PointTables(metric, p, order=order, mode=mode)


def fundamental(metric, p, mode="jet"):
    t = PointTables(metric, p, order=2, mode=mode)
    return t.fundamental_real, t.fundamental_complex


def spray(metric, p, mode="jet"):
    return PointTables(metric, p, order=3, mode=mode).spray


def cartan(metric, p, mode="jet"):
    return PointTables(metric, p, order=3, mode=mode).cartan


def chern(metric, p, mode="jet"):
    return PointTables(metric, p, order=3, mode=mode).chern


def berwald(metric, p, mode="jet"):
    return PointTables(metric, p, order=4, mode=mode).berwald


def n_coeffs(metric, p, mode="jet"):
    return PointTables(metric, p, order=3, mode=mode).n_coeffs


# ---------------------------------------------------------------------------
# inner-product identities

def bilinear_g(g, a, b):
    """Complex-bilinear extension of the real inner product."""
    return a @ g @ b


def lemma_inner_residual(T, V, W):
    """|G(V, conj W) - 2 g(V, conj W)| for (1,0) vertical vectors V, W."""
    from .geometry import complexified_components

    n = T.n
    lhs = V @ T.fundamental_complex.G @ np.conj(W)
    Vy = complexified_components(V)
    Wb = complexified_components(np.zeros(n), np.conj(W))
    rhs = 2.0 * bilinear_g(T.fundamental_real.g, Vy, Wb)
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def symmetric_product_residual(T, V, W):
    """|g(V^o, W^o) - Re(<V,W> + <<V,W>>)| with <<V,W>> = G_ab V^a W^b."""
    from .geometry import realify

    g = T.fundamental_real.g
    lhs = realify(V) @ g @ realify(W)
    herm = V @ T.fundamental_complex.G @ np.conj(W)
    sym = V @ T.G_sym @ W
    rhs = (herm + sym).real
    return abs(lhs - rhs) / max(1.0, abs(rhs))
