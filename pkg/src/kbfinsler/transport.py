"""Real geodesics and parallel transport with the horizontal Cartan coefficients.

Both integrators are fixed-step classical RK4.  Transport along a geodesic
integrates the joint system (x, y, V) so that every RK stage sees the
connection at the exact stage state of the curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .connections import PointTables
from .errors import DomainError, FinslerError, StiffnessError
from .geometry import V_MIN, PointState, apply_J, decompose_type, realify


def _state(metric, x, y):
    try:
        p = PointState(x, y)
    except DomainError:
        raise
    if not metric.domain_ok(p.z, p.v):
        raise DomainError(f"{metric.label}: curve left the domain at x={x}")
    return p


def spray_at(metric, x, y):
    return PointTables(metric, _state(metric, x, y), order=2).spray_jet.value


def cartan_at(metric, x, y):
    T = PointTables(metric, _state(metric, x, y), order=3)
    return T.cartan_h_jet.value, T.g_jet.value, T.spray_jet.value


def rk4_step(f, t, u, h):
    k1 = f(t, u)
    k2 = f(t + h / 2, u + h / 2 * k1)
    k3 = f(t + h / 2, u + h / 2 * k2)
    k4 = f(t + h, u + h * k3)
    return u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _integrate(f, u0, T, steps, error_bound=None):
    """Fixed-step RK4; with ``error_bound`` a step-doubling estimate is checked every step."""
    if steps < 1:
        raise ValueError("steps must be positive")
    h = T / steps
    ts = np.linspace(0.0, T, steps + 1)
    out = [np.asarray(u0, dtype=float)]
    u = out[0]
    for i in range(steps):
        t = ts[i]
        try:
            new = rk4_step(f, t, u, h)
            if error_bound is not None:
                half = rk4_step(f, t + h / 2, rk4_step(f, t, u, h / 2), h / 2)
                est = float(np.abs(half - new).max()) / 15.0
                if est > error_bound:
                    raise StiffnessError(f"step-doubling estimate {est:.3g} exceeds {error_bound:g} at t={t:.6g}")
                new = half + (half - new) / 15.0
        except DomainError as exc:
            err = DomainError(f"{exc} (exit near t={t:.6g})")
            err.exit_time = float(t)
            raise err from None
        u = new
        out.append(u)
    return ts, np.array(out)


@dataclass
class TrajectoryRecord:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    energy: np.ndarray
    metric: dict = field(default_factory=dict)

    @property
    def energy_drift(self):
        return float(np.abs(self.energy - self.energy[0]).max())

    def rows(self):
        return np.column_stack([self.t, self.x, self.y])


def integrate_geodesic(metric, x0, y0, T=1.0, steps=1000, error_bound=None):
    """Solve x'' = -2 spray(x, x') as the first-order system (x, y)."""
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    if steps < 10:
        raise ValueError("geodesic integration needs at least 10 steps")
    m = x0.size

    def f(t, u):
        x, y = u[:m], u[m:]
        return np.concatenate([y, -2.0 * spray_at(metric, x, y)])

    ts, us = _integrate(f, np.concatenate([x0, y0]), T, steps, error_bound)
    xs, ys = us[:, :m], us[:, m:]
    energy = np.array([metric.f2(PointState(a, b).z, PointState(a, b).v) for a, b in zip(xs, ys)])
    return TrajectoryRecord(ts, xs, ys, energy, metric.identity())


# ---------------------------------------------------------------------------
# curves and transport

@dataclass(frozen=True)
class Curve:
    """A curve in real base coordinates.

    Either a geodesic (``x0``, ``y0``; integrated jointly with the transported
    vectors) or an analytic arc given by ``sigma`` and its derivative ``dsigma``.
    """

    T: float = 1.0
    x0: np.ndarray | None = None
    y0: np.ndarray | None = None
    sigma: Callable | None = None
    dsigma: Callable | None = None

    @classmethod
    def geodesic(cls, x0, y0, T=1.0):
        return cls(T=T, x0=np.asarray(x0, dtype=float), y0=np.asarray(y0, dtype=float))

    @classmethod
    def analytic(cls, sigma, dsigma, T=1.0):
        return cls(T=T, sigma=sigma, dsigma=dsigma)

    @classmethod
    def line(cls, x0, direction, T=1.0):
        x0 = np.asarray(x0, dtype=float)
        d = np.asarray(direction, dtype=float)
        return cls.analytic(lambda t: x0 + t * d, lambda t: d, T)

    @property
    def is_geodesic(self):
        return self.sigma is None

    @property
    def dim(self):
        return (self.x0 if self.is_geodesic else np.asarray(self.sigma(0.0))).size


@dataclass
class TransportResult:
    t: np.ndarray
    V: np.ndarray             # (steps+1, 2n, m): columns are transported vectors
    x: np.ndarray
    y: np.ndarray
    gram: np.ndarray          # (steps+1, m, m): g(sigma, sigma')(V_i, V_j)
    geodesic: bool

    def metric_drift(self):
        return float(np.abs(self.gram - self.gram[0]).max())


def parallel_transport(metric, curve, V0, steps=1000, error_bound=None):
    """Transport the columns of ``V0`` (shape (2n,) or (2n, m)) along ``curve``."""
    V0 = np.asarray(V0, dtype=float)
    V0 = V0.reshape(V0.shape[0], -1)
    d, m = V0.shape
    if d != curve.dim:
        raise ValueError(f"vector size {d} does not match curve dimension {curve.dim}")

    def rhs_V(x, y, V):
        ch = cartan_at(metric, x, y)[0]
        return -np.einsum("klj,lm,j->km", ch, V, y)

    if curve.is_geodesic:
        def f(t, u):
            x, y = u[:d], u[d:2 * d]
            V = u[2 * d:].reshape(d, m)
            ch, _, spr = cartan_at(metric, x, y)
            return np.concatenate([y, -2.0 * spr,
                                   -np.einsum("klj,lm,j->km", ch, V, y).ravel()])

        u0 = np.concatenate([curve.x0, curve.y0, V0.ravel()])
        ts, us = _integrate(f, u0, curve.T, steps, error_bound)
        xs, ys = us[:, :d], us[:, d:2 * d]
        Vs = us[:, 2 * d:].reshape(-1, d, m)
    else:
        def f(t, u):
            y = np.asarray(curve.dsigma(t), dtype=float)
            if np.linalg.norm(y) < V_MIN:
                raise DomainError(f"curve velocity below {V_MIN:g} at t={t:.6g}")
            return rhs_V(np.asarray(curve.sigma(t), dtype=float), y, u.reshape(d, m)).ravel()

        ts, us = _integrate(f, V0.ravel(), curve.T, steps, error_bound)
        xs = np.array([curve.sigma(t) for t in ts], dtype=float)
        ys = np.array([curve.dsigma(t) for t in ts], dtype=float)
        Vs = us.reshape(-1, d, m)
    gram = np.array([np.einsum("jm,jk,kl->ml", V, cartan_at(metric, x, y)[1], V)
                     for x, y, V in zip(xs, ys, Vs)])
    return TransportResult(ts, Vs, xs, ys, gram, curve.is_geodesic)


def _jpair(metric, curve, V0, steps):
    V0 = np.asarray(V0, dtype=float)
    res = parallel_transport(metric, curve, np.column_stack([V0, apply_J(V0)]), steps)
    return res, res.V[:, :, 0], res.V[:, :, 1]


def j_commutation_residual(metric, curve, V0, steps=1000):
    """max_t |P(J V0) - J P(V0)| / |V0|."""
    _, P, PJ = _jpair(metric, curve, V0, steps)
    JP = np.array([apply_J(u) for u in P])
    return float(np.linalg.norm(PJ - JP, axis=1).max() / np.linalg.norm(V0))


def type_residual_history(metric, curve, seed, steps=1000):
    """|(0,1)-part of the transported (1,0) seed| / |seed| at every step.

    The complexified seed is u_o = (u - iJu)/2 with u = realify(seed); its
    transport is (P u - i P(Ju))/2 by complex linearity.
    """
    seed = np.asarray(seed, dtype=complex)
    u = realify(seed)
    _, P, PJ = _jpair(metric, curve, u, steps)
    hist = np.array([np.linalg.norm(decompose_type(0.5 * (a - 1j * b))[1]) for a, b in zip(P, PJ)])
    return hist / np.linalg.norm(seed)


def type_preservation_residual(metric, curve, seed, steps=1000):
    return float(type_residual_history(metric, curve, seed, steps).max())


def self_parallel_residual(metric, x0, y0, T=1.0, steps=1000):
    """Transport the initial velocity along the geodesic and compare with the velocity."""
    res = parallel_transport(metric, Curve.geodesic(x0, y0, T), y0, steps)
    return float(np.abs(res.V[:, :, 0] - res.y).max())
