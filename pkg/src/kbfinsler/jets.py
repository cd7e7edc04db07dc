"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` stores the Taylor coefficients of a (possibly array-valued)
function of ``m`` real variables around a base point, truncated at total
order ``K <= 4``.  Coefficients may be complex: the variables themselves are
always real, so conjugation, real and imaginary parts act coefficient-wise.

Monomials are enumerated in graded order, hence the basis for order ``K`` is a
prefix of the basis for order ``K + 1`` and truncation is a slice.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, OrderError

MAX_ORDER = 4
BRANCH_FLOOR = 1e-14


# ---------------------------------------------------------------------------
# basis bookkeeping

@lru_cache(maxsize=None)
def _basis(m):
    exps = []
    counts = []
    for d in range(MAX_ORDER + 1):
        for combo in itertools.combinations_with_replacement(range(m), d):
            e = [0] * m
            for i in combo:
                e[i] += 1
            exps.append(e)
        counts.append(len(exps))
    exps = np.array(exps, dtype=np.int64).reshape(len(exps), m)
    radix = (MAX_ORDER + 1) ** np.arange(m, dtype=np.int64)
    keys = exps @ radix
    order = np.argsort(keys)
    fact = np.prod([[math.factorial(int(a)) for a in row] for row in exps], axis=1) if m else np.ones(1)
    return exps, keys[order], order, tuple(counts), radix, np.asarray(fact, dtype=float)


def n_monomials(m, order):
    if not 0 <= order <= MAX_ORDER:
        raise OrderError(f"jets carry orders 0..{MAX_ORDER}, got {order}")
    return _basis(m)[3][order]


def _lookup(m, keys):
    _, sorted_keys, perm, _, _, _ = _basis(m)
    pos = np.searchsorted(sorted_keys, keys)
    return perm[pos]


def monomial_index(m, exponents):
    exps = np.asarray(exponents, dtype=np.int64)
    if exps.sum() > MAX_ORDER:
        raise OrderError(f"total order {int(exps.sum())} exceeds {MAX_ORDER}")
    radix = _basis(m)[4]
    return int(_lookup(m, np.array([exps @ radix]))[0])


@lru_cache(maxsize=None)
def _mul_plan(m, order):
    exps, _, _, counts, radix, _ = _basis(m)
    deg = exps.sum(axis=1)
    ia, ib, ic = [], [], []
    for a in range(counts[order]):
        nb = counts[order - deg[a]]
        tgt = _lookup(m, (exps[:nb] + exps[a]) @ radix)
        ia.append(np.full(nb, a))
        ib.append(np.arange(nb))
        ic.append(tgt)
    ia, ib, ic = (np.concatenate(x) for x in (ia, ib, ic))
    srt = np.argsort(ic, kind="stable")
    ia, ib, ic = ia[srt], ib[srt], ic[srt]
    starts = np.flatnonzero(np.r_[True, ic[1:] != ic[:-1]])
    return ia, ib, starts


@lru_cache(maxsize=None)
def _deriv_plan(m, order, var):
    exps, _, _, counts, radix, _ = _basis(m)
    tgt = exps[: counts[order - 1]]
    src = _lookup(m, (tgt + np.eye(m, dtype=np.int64)[var]) @ radix)
    return src, (tgt[:, var] + 1).astype(float)


# ---------------------------------------------------------------------------
# the jet type

class Jet:
    """Array-valued truncated Taylor polynomial in ``nvars`` real variables.

    ``coef`` has shape ``(*shape, N)`` with ``N`` the number of monomials of
    total degree ``<= order``.  Arithmetic broadcasts over ``shape`` like numpy.
    """

    __slots__ = ("coef", "nvars", "order")
    __array_priority__ = 1000

    def __init__(self, coef, nvars, order):
        if order > MAX_ORDER:
            raise OrderError(f"jets carry at most order {MAX_ORDER}, got {order}")
        coef = np.asarray(coef)
        if coef.shape[-1] != n_monomials(nvars, order):
            raise ValueError("coefficient axis does not match (nvars, order)")
        self.coef = coef
        self.nvars = nvars
        self.order = order

    # constructors --------------------------------------------------------
    @classmethod
    def constant(cls, value, nvars, order):
        value = np.asarray(value)
        coef = np.zeros(value.shape + (n_monomials(nvars, order),), dtype=np.result_type(value, float))
        coef[..., 0] = value
        return cls(coef, nvars, order)

    @classmethod
    def variable(cls, value, index, nvars, order):
        jet = cls.constant(value, nvars, order)
        if order >= 1:
            jet.coef[..., 1 + index] = 1.0
        return jet

    # introspection -------------------------------------------------------
    @property
    def shape(self):
        return self.coef.shape[:-1]

    @property
    def value(self):
        return self.coef[..., 0]

    @property
    def real(self):
        return Jet(self.coef.real.copy(), self.nvars, self.order)

    @property
    def imag(self):
        return Jet(self.coef.imag.copy(), self.nvars, self.order)

    def conj(self):
        return Jet(np.conj(self.coef), self.nvars, self.order)

    def __repr__(self):
        return f"Jet(value={self.value!r}, nvars={self.nvars}, order={self.order})"

    def __len__(self):
        return self.shape[0]

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.coef[key + (slice(None),)], self.nvars, self.order)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def transpose(self, *axes):
        """Permute the array axes (the monomial axis stays last)."""
        axes = axes or tuple(reversed(range(len(self.shape))))
        return Jet(self.coef.transpose(*axes, len(self.shape)), self.nvars, self.order)

    def truncate(self, order):
        if order > self.order:
            raise OrderError(f"cannot raise a jet from order {self.order} to {order}")
        return Jet(self.coef[..., : n_monomials(self.nvars, order)], self.nvars, order)

    def astype(self, dtype):
        return Jet(self.coef.astype(dtype), self.nvars, self.order)

    def coefficient(self, exponents):
        return self.coef[..., monomial_index(self.nvars, exponents)]

    def partial(self, exponents):
        """Mixed partial derivative at the base point for a multi-index."""
        idx = monomial_index(self.nvars, exponents)
        if sum(exponents) > self.order:
            raise OrderError(f"jet of order {self.order} cannot deliver order {sum(exponents)}")
        return self.coef[..., idx] * _basis(self.nvars)[5][idx]

    def partials(self):
        """All partial derivatives at the base point, in monomial order."""
        return self.coef * _basis(self.nvars)[5][: self.coef.shape[-1]]

    def degrees(self):
        """Total degree of each monomial slot."""
        return _basis(self.nvars)[0][: self.coef.shape[-1]].sum(axis=1)

    def deriv(self, var):
        """Partial derivative in one seeded variable; the order drops by one."""
        if self.order == 0:
            raise OrderError("cannot differentiate an order-0 jet")
        src, fac = _deriv_plan(self.nvars, self.order, var)
        return Jet(self.coef[..., src] * fac, self.nvars, self.order - 1)

    def gradient(self, variables):
        """Stack of partial derivatives; the new axis is appended last."""
        return stack([self.deriv(v) for v in variables], axis=-1)

    # arithmetic ----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets seeded on different variable sets")
            k = min(self.order, other.order)
            a = self if self.order == k else self.truncate(k)
            b = other if other.order == k else other.truncate(k)
            return a, b
        return None, None

    def __add__(self, other):
        a, b = self._coerce(other)
        if a is not None:
            return Jet(a.coef + b.coef, a.nvars, a.order)
        other = np.asarray(other)
        shape = np.broadcast_shapes(self.shape, other.shape)
        coef = np.broadcast_to(self.coef, shape + self.coef.shape[-1:]).astype(
            np.result_type(self.coef, other), copy=True)
        coef[..., 0] += other
        return Jet(coef, self.nvars, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coef, self.nvars, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if a is not None:
            ia, ib, starts = _mul_plan(a.nvars, a.order)
            prod = a.coef[..., ia] * b.coef[..., ib]
            return Jet(np.add.reduceat(prod, starts, axis=-1), a.nvars, a.order)
        other = np.asarray(other)
        return Jet(self.coef * other[..., None], self.nvars, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.coef / np.asarray(other)[..., None], self.nvars, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        return power(self, p)

    # elementary functions -----------------------------------------------
    def _compose(self, taylor):
        """Evaluate ``sum_k taylor[k] * (self - value)**k`` (Horner)."""
        delta = Jet(self.coef.copy(), self.nvars, self.order)
        delta.coef[..., 0] = 0
        res = Jet.constant(taylor[self.order], self.nvars, self.order)
        for k in range(self.order - 1, -1, -1):
            res = res * delta + taylor[k]
        return res

    def reciprocal(self):
        c0 = self.value
        if np.any(c0 == 0):
            raise DomainError("division by a jet with zero value")
        return self._compose([(-1.0) ** k / c0 ** (k + 1) for k in range(self.order + 1)])

    def sqrt(self):
        return power(self, Fraction(1, 2))


def _check_branch(c0, what):
    c0 = np.asarray(c0)
    if np.iscomplexobj(c0):
        bad = (np.abs(c0) < BRANCH_FLOOR) | ((c0.real < 0) & (np.abs(c0.imag) <= BRANCH_FLOOR * np.abs(c0)))
    else:
        bad = c0 < BRANCH_FLOOR
    if np.any(bad):
        raise DomainError(f"{what}: argument below {BRANCH_FLOOR:g} or on the branch cut")


def power(x, p):
    """``x**p`` for integer or rational ``p`` on jets, numpy values or scalars."""
    if isinstance(p, float) and p.is_integer():
        p = int(p)
    if isinstance(p, Fraction) and p.denominator == 1:
        p = int(p)
    if isinstance(x, Jet):
        if isinstance(p, int):
            if p < 0:
                return power(x.reciprocal(), -p)
            res = Jet.constant(np.ones(x.shape, dtype=x.coef.dtype), x.nvars, x.order)
            base = x
            while p:
                if p & 1:
                    res = res * base
                p >>= 1
                if p:
                    base = base * base
            return res
        p = Fraction(p).limit_denominator(10**6) if not isinstance(p, Fraction) else p
        if p.denominator == 1:
            return power(x, int(p))
        c0 = x.value
        _check_branch(c0, f"power {p}")
        pf = float(p)
        taylor = []
        binom = 1.0
        for k in range(x.order + 1):
            taylor.append(binom * c0 ** (pf - k))
            binom *= (pf - k) / (k + 1)
        return x._compose(taylor)
    if isinstance(p, int):
        return x ** p
    arr = np.asarray(x)
    _check_branch(arr, f"power {p}")
    return arr ** float(p)


# ---------------------------------------------------------------------------
# generic primitives used by metric evaluators (jets or numpy values)

def conj(x):
    return x.conj() if isinstance(x, Jet) else np.conj(x)


def real(x):
    return x.real if isinstance(x, Jet) else np.real(x)


def imag(x):
    return x.imag if isinstance(x, Jet) else np.imag(x)


def abs2(x):
    return x * conj(x)


def sqrt(x):
    return power(x, Fraction(1, 2))


# ---------------------------------------------------------------------------
# array helpers

def stack(jets, axis=0):
    jets = list(jets)
    k = min(j.order for j in jets)
    coefs = [j.truncate(k).coef for j in jets]
    ax = axis if axis >= 0 else axis - 1
    return Jet(np.stack(coefs, axis=ax), jets[0].nvars, k)


def jeinsum(subscripts, a, b):
    """Two-operand einsum where either operand may be a jet.

    Jet x jet products use the truncated Cauchy product on the monomial axis.
    """
    if isinstance(a, Jet) and isinstance(b, Jet):
        a, b = a._coerce(b)
        lhs, out = subscripts.split("->")
        sa, sb = lhs.split(",")
        ia, ib, starts = _mul_plan(a.nvars, a.order)
        prod = np.einsum(f"{sa}P,{sb}P->{out}P", a.coef[..., ia], b.coef[..., ib])
        return Jet(np.add.reduceat(prod, starts, axis=-1), a.nvars, a.order)
    lhs, out = subscripts.split("->")
    sa, sb = lhs.split(",")
    if isinstance(a, Jet):
        return Jet(np.einsum(f"{sa}P,{sb}->{out}P", a.coef, np.asarray(b)), a.nvars, a.order)
    if isinstance(b, Jet):
        return Jet(np.einsum(f"{sa},{sb}P->{out}P", np.asarray(a), b.coef), b.nvars, b.order)
    return np.einsum(subscripts, a, b)


def jinv(mat, max_condition=1e12):
    """Inverse of a square jet matrix by a Neumann series around its value.

    Returns ``(inverse, condition_number)``; raises ``SingularMetricError`` when
    the value matrix is singular or too ill-conditioned.
    """
    from .errors import SingularMetricError

    m0 = mat.value
    cond = float(np.linalg.cond(m0))
    if not np.isfinite(cond) or cond > max_condition:
        raise SingularMetricError(f"matrix condition {cond:.3g} exceeds {max_condition:g}", condition=cond)
    m0inv = np.linalg.inv(m0)
    delta = Jet(mat.coef.copy(), mat.nvars, mat.order)
    delta.coef[..., 0] = 0
    step = -jeinsum("ij,jk->ik", m0inv, delta)
    eye = np.eye(m0.shape[0], dtype=np.result_type(m0, float))
    acc = Jet.constant(eye, mat.nvars, mat.order)
    for _ in range(mat.order):
        acc = jeinsum("ij,jk->ik", step, acc) + eye
    return jeinsum("ij,jk->ik", acc, m0inv), cond


def seed(values, order, dtype=float):
    """Jets for independent variables ``u_i = values[i] + du_i``."""
    values = np.asarray(values, dtype=dtype)
    m = values.size
    return [Jet.variable(values.flat[i], i, m, order) for i in range(m)]
