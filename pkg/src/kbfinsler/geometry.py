"""Real/complex coordinate identifications and the canonical complex structure.

Index convention: real index ``a`` in ``0..2n-1``; the starred partner of a
complex index ``alpha`` is ``alpha + n``.  So ``z[alpha] = x[alpha] + i x[alpha+n]``
and likewise for ``v`` and ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError

V_MIN = 1e-8


def to_complex(u):
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size % 2:
        raise DimensionError(f"expected a real 2n-vector, got shape {u.shape}")
    n = u.size // 2
    return u[:n] + 1j * u[n:]


def to_real(w):
    w = np.asarray(w, dtype=complex)
    return np.concatenate([w.real, w.imag])


@dataclass(frozen=True)
class PointState:
    """A point of the slit bundle, stored in real coordinates (x; y)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).copy()
        y = np.asarray(self.y, dtype=float).copy()
        if x.shape != y.shape or x.ndim != 1 or x.size % 2:
            raise DimensionError(f"x and y must be real 2n-vectors, got {x.shape} and {y.shape}")
        if np.linalg.norm(y) < V_MIN:
            raise DomainError(f"|v| = {np.linalg.norm(y):.3g} is below the slit-bundle floor {V_MIN:g}")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_complex(cls, z, v):
        return cls(to_real(np.atleast_1d(z)), to_real(np.atleast_1d(v)))

    @property
    def n(self):
        return self.x.size // 2

    @property
    def z(self):
        return to_complex(self.x)

    @property
    def v(self):
        return to_complex(self.y)

    def scaled(self, lam):
        """Same base point, fiber vector multiplied by a real or complex scalar."""
        return PointState.from_complex(self.z, lam * self.v)

    def __eq__(self, other):
        return isinstance(other, PointState) and np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    def __hash__(self):
        return hash((self.x.tobytes(), self.y.tobytes()))


def star(a, n):
    """Partner index under the 2n-periodic convention ``a -> a + n (mod 2n)``."""
    return (a + n) % (2 * n)


def j_matrix(n):
    """Matrix of J on R^{2n}: (u^a, u^{a*}) -> (-u^{a*}, u^a)."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def apply_J(u, slot="fiber"):
    """Canonical complex structure on a base or fiber real vector.

    Both slots use the same matrix; ``slot`` only documents which factor of the
    tangent space of the slit bundle is meant.
    """
    if slot not in ("base", "fiber"):
        raise ValueError(f"slot must be 'base' or 'fiber', got {slot!r}")
    u = np.asarray(u)
    if u.shape[0] % 2:
        raise DimensionError(f"apply_J needs 2n components, got {u.shape[0]}")
    n = u.shape[0] // 2
    return np.concatenate([-u[n:], u[:n]])


def decompose_type(u):
    """Split a (possibly complexified) real-basis vector into its (1,0) and (0,1) parts.

    The parts are returned as complex n-vectors of coefficients on ``d/dv`` and
    ``d/dvbar``.  For a real ``u`` the second part is the conjugate of the first.
    """
    u = np.asarray(u)
    if u.ndim != 1 or u.size % 2:
        raise DimensionError(f"expected a 2n-vector, got shape {u.shape}")
    n = u.size // 2
    # d/dy^a = d/dv^a + d/dvbar^a ;  d/dy^{a*} = i d/dv^a - i d/dvbar^a
    return u[:n] + 1j * u[n:], u[:n] - 1j * u[n:]


def realify(w):
    """The ``^o`` map: a (1,0) vector w -> w + conj(w) in the real basis."""
    return to_real(w)


def complexified_components(w10, w01=None):
    """Real-basis (d/dy) components of ``w10^a d/dv^a + w01^a d/dvbar^a``."""
    w10 = np.asarray(w10, dtype=complex)
    w01 = np.zeros_like(w10) if w01 is None else np.asarray(w01, dtype=complex)
    # d/dv = (d/dy - i d/dy*)/2, d/dvbar = (d/dy + i d/dy*)/2
    return np.concatenate([(w10 + w01) / 2, -1j * (w10 - w01) / 2])
