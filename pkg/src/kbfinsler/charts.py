"""Holomorphic chart changes and the transformation laws of the complexified Cartan coefficients.

Built-in maps are ``w = A (z + eps q(z)) + b`` where ``q`` is a quadratic whose
k-th component only involves ``z_0..z_{k-1}``.  Such maps have an exact
polynomial inverse, so pushed-forward metrics stay jet-friendly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classify import residual_J_horizontal, residual_J_vertical
from .connections import PointTables
from .errors import DimensionError, DomainError, HypothesisError, ParamError
from .geometry import PointState
from .metrics import MetricDefinition

MAX_JACOBIAN_CONDITION = 1e8


def _matvec(M, vec):
    """M @ vec for a list of scalars/jets/arrays, skipping zero entries."""
    out = []
    for row in M:
        acc = None
        for m, x in zip(row, vec):
            if m == 0:
                continue
            term = x * complex(m) if m != 1 else x
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else 0.0 * vec[0])
    return out


@dataclass(frozen=True, eq=False)
class Biholomorphism:
    A: np.ndarray
    b: np.ndarray
    eps: float = 0.0
    Q: np.ndarray | None = None
    label: str = "chart"
    A_inv: np.ndarray = field(init=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"linear part must be square, got {A.shape}")
        cond = np.linalg.cond(A)
        if not np.isfinite(cond) or cond > MAX_JACOBIAN_CONDITION:
            raise ParamError(f"linear part is singular or ill-conditioned (cond {cond:.3g})")
        Q = np.zeros((n, n, n), dtype=complex) if self.Q is None else np.asarray(self.Q, dtype=complex)
        for k in range(n):
            if np.any(Q[k, k:, :]) or np.any(Q[k, :, k:]):
                raise ParamError("quadratic part must be strictly triangular (component k uses z_<k only)")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=complex).reshape(n))
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "A_inv", np.linalg.inv(A))

    @property
    def n(self):
        return self.A.shape[0]

    def _q(self, z):
        n = self.n
        out = []
        for k in range(n):
            acc = 0.0 * z[0]
            for i in range(k):
                for j in range(k):
                    if self.Q[k, i, j] != 0:
                        acc = acc + z[i] * z[j] * complex(self.Q[k, i, j])
            out.append(acc)
        return out

    def forward(self, z):
        z = list(z)
        u = [zk + self.eps * qk for zk, qk in zip(z, self._q(z))]
        return [x + bk for x, bk in zip(_matvec(self.A, u), self.b)]

    def inverse(self, w, tangent=None):
        """z = phi^{-1}(w); with ``tangent`` also (d phi^{-1}/dw) tangent."""
        n = self.n
        u = _matvec(self.A_inv, [wk - bk for wk, bk in zip(list(w), self.b)])
        du = _matvec(self.A_inv, list(tangent)) if tangent is not None else None
        z, dz = [], []
        for k in range(n):
            zk, dzk = u[k], (du[k] if du is not None else None)
            for i in range(k):
                for j in range(k):
                    c = self.Q[k, i, j]
                    if c == 0:
                        continue
                    zk = zk - z[i] * z[j] * complex(self.eps * c)
                    if du is not None:
                        dzk = dzk - (dz[i] * z[j] + z[i] * dz[j]) * complex(self.eps * c)
            z.append(zk)
            dz.append(dzk)
        return (z, dz) if tangent is not None else z

    def jacobian(self, z):
        """dw/dz at z (n x n)."""
        z = np.asarray(z, dtype=complex)
        Dq = np.einsum("kij,j->ki", self.Q, z) + np.einsum("kji,j->ki", self.Q, z)
        J = self.A @ (np.eye(self.n) + self.eps * Dq)
        if np.linalg.cond(J) > MAX_JACOBIAN_CONDITION:
            raise DomainError(f"{self.label}: Jacobian ill-conditioned at z={z}")
        return J

    def hessian(self, z=None):
        """d^2 w^b / dz^m dz^n (constant for quadratic maps)."""
        return self.eps * np.einsum("bk,kmn->bmn", self.A, self.Q + self.Q.transpose(0, 2, 1))

    def push_point(self, p):
        z = p.z
        w = np.array(self.forward(z), dtype=complex)
        return PointState.from_complex(w, self.jacobian(z) @ p.v)


def identity_map(n):
    return Biholomorphism(np.eye(n), np.zeros(n), label="identity")


def linear_map(A, b=None):
    A = np.asarray(A, dtype=complex)
    return Biholomorphism(A, np.zeros(A.shape[0]) if b is None else b, label="linear")


def quadratic_map(n, eps=0.05, Q=None, A=None):
    """Triangular quadratic perturbation; the default for n=2 is w = (z1, z2 + eps z1^2)."""
    if Q is None:
        Q = np.zeros((n, n, n), dtype=complex)
        for k in range(1, n):
            Q[k, k - 1, k - 1] = 1.0
    return Biholomorphism(np.eye(n) if A is None else A, np.zeros(n), eps, Q, label=f"quadratic(eps={eps:g})")


def pushforward_metric(metric, phi):
    """The same Finsler metric written in the chart w = phi(z)."""
    if phi.n != metric.n:
        raise DimensionError(f"chart dimension {phi.n} differs from metric dimension {metric.n}")

    def ev(w, u):
        z, dz = phi.inverse(w, u)
        return metric.evaluator(z, dz)

    def dom(w, u):
        z = np.array(phi.inverse(list(w)))
        return metric.domain_ok(z, u)

    params = dict(metric.params)
    params["chart"] = phi.label
    return MetricDefinition(metric.n, ev, f"{metric.label}@{phi.label}", params, domain=dom,
                            sample_radius=metric.sample_radius, provenance="pushforward")


def transform_laws(NA, vA, P, H):
    """Right-hand sides of the three laws, expressed with chart-A data.

    ``NA`` is (nonlinear, horizontal, vertical) in chart A, ``P`` = dz_B/dz_A,
    ``H`` = d^2 z_B / dz_A dz_A.  Returns arrays for the horizontal,
    nonlinear and vertical coefficients in chart B.
    """
    nl, hz, vt = NA
    Q = np.linalg.inv(P)
    rhs_a = (np.einsum("ma,ng,dmn,bd->bag", Q, Q, hz, P)
             - np.einsum("ma,ng,bmn->bag", Q, Q, H))
    rhs_b = (np.einsum("ng,dn,bd->bg", Q, nl, P)
             - np.einsum("ng,bmn,m->bg", Q, H, vA))
    rhs_c = np.einsum("ma,ng,dmn,bd->bag", Q, Q, vt, P)
    return rhs_a, rhs_b, rhs_c


def transform_residuals(metric, phi, p, tol=1e-7, mode="jet", check_hypothesis=True):
    """Max-norm residuals (horizontal, nonlinear, vertical) of the chart-change laws at p (chart A)."""
    TA = PointTables(metric, p, order=3, mode=mode)
    if check_hypothesis:
        rh, rv = residual_J_horizontal(TA), residual_J_vertical(TA)
        if max(rh, rv) > tol:
            raise HypothesisError(f"complex structure not parallel at sample (horizontal {rh:.3g}, vertical {rv:.3g})")
    NA = TA.n_coeffs
    pB = phi.push_point(p)
    TB = PointTables(pushforward_metric(metric, phi), pB, order=3, mode=mode)
    NB = TB.n_coeffs
    P = phi.jacobian(p.z)
    rhs_a, rhs_b, rhs_c = transform_laws((NA.nonlinear, NA.horizontal, NA.vertical), p.v, P, phi.hessian(p.z))
    return (float(np.abs(NB.horizontal - rhs_a).max()),
            float(np.abs(NB.nonlinear - rhs_b).max()),
            float(np.abs(NB.vertical - rhs_c).max()))
