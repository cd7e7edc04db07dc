"""Derivatives of F^2: jet evaluation, Wirtinger assembly and a finite-difference oracle.

Real coordinates of the slit bundle are numbered ``0..4n-1``: ``x^1..x^{2n}``
first, then ``y^1..y^{2n}``.  Names such as ``"y1"`` (1-based) are
accepted wherever a coordinate index is expected.
"""

from __future__ import annotations

import itertools
import math
import re
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, OrderError
from .jets import MAX_ORDER, Jet, _basis, n_monomials, seed

REALITY_TOL = 1e-12


def coord_index(c, n):
    """Map ``"x3"``/``"y1"`` (1-based) or a plain integer to a 0-based real coordinate."""
    if isinstance(c, (int, np.integer)):
        if not 0 <= c < 4 * n:
            raise IndexError(f"coordinate index {c} outside 0..{4 * n - 1}")
        return int(c)
    m = re.fullmatch(r"\s*([xy])(\d+)\s*", str(c))
    if not m:
        raise ValueError(f"cannot parse coordinate {c!r}")
    k = int(m.group(2))
    if not 1 <= k <= 2 * n:
        raise IndexError(f"coordinate {c!r} outside 1..{2 * n}")
    return (k - 1) + (2 * n if m.group(1) == "y" else 0)


def _complex_inputs(x, y, n):
    z = [x[a] + 1j * x[a + n] for a in range(n)]
    v = [y[a] + 1j * y[a + n] for a in range(n)]
    return z, v


def metric_jet(metric, p, order=MAX_ORDER, dirs=None):
    """Real jet of F^2 at ``p``.

    With ``dirs=None`` all ``4n`` real coordinates are seeded; otherwise only
    the distinct coordinates listed in ``dirs`` (in first-seen order).
    """
    if order > MAX_ORDER:
        raise OrderError(f"order {order} exceeds {MAX_ORDER}")
    metric.check_domain(p)
    n = p.n
    base = np.concatenate([p.x, p.y])
    if dirs is None:
        seeded = list(range(4 * n))
    else:
        seeded = list(dict.fromkeys(coord_index(d, n) for d in dirs))
    jets = seed(base[seeded], order)
    coords = [Jet.constant(base[i], len(seeded), order) for i in range(4 * n)]
    for k, i in enumerate(seeded):
        coords[i] = jets[k]
    z, v = _complex_inputs(coords[: 2 * n], coords[2 * n:], n)
    out = metric.evaluator(z, v)
    if not isinstance(out, Jet):
        out = Jet.constant(out, len(seeded), order)
    if np.iscomplexobj(out.coef):
        scale = max(1.0, float(np.abs(out.value)))
        if np.abs(out.coef.imag).max(initial=0.0) > REALITY_TOL * scale * 1e3:
            raise DomainError(f"{metric.label}: evaluator is not real-valued "
                              f"(imaginary part {float(np.abs(out.value.imag)):.3g})")
        out = out.real
    return out


def eval_real_partials(metric, p, dirs, order=None):
    """Mixed real partial of F^2 at ``p`` in the listed coordinates (order <= 4)."""
    dirs = list(dirs)
    if order is None:
        order = len(dirs)
    if order > MAX_ORDER:
        raise OrderError(f"order {order} exceeds {MAX_ORDER}")
    if order != len(dirs):
        raise ValueError(f"order {order} does not match {len(dirs)} directions")
    idx = [coord_index(d, p.n) for d in dirs]
    jet = metric_jet(metric, p, order=order, dirs=idx)
    seeded = list(dict.fromkeys(idx))
    exps = [idx.count(s) for s in seeded]
    return float(jet.partial(exps)) if seeded else float(jet.value)


# ---------------------------------------------------------------------------
# Wirtinger calculus on jets seeded in all 4n real coordinates

def d_real(jet, var):
    return jet.deriv(var)


def wirtinger_grad(jet, n, block, bar=False):
    """Wirtinger gradient appended as a last axis.

    ``block=0`` differentiates in z (real vars 0..2n-1), ``block=1`` in v.
    ``bar`` selects d/dzbar or d/dvbar.
    """
    off = 2 * n * block
    g = jet.gradient(range(off, off + 2 * n))
    re_, im_ = g[..., :n], g[..., n:]
    return (re_ + 1j * im_) * 0.5 if bar else (re_ - 1j * im_) * 0.5


def wirtinger_op(jet, n, block, index, bar=False):
    off = 2 * n * block
    a = jet.deriv(off + index)
    b = jet.deriv(off + index + n)
    return (a + 1j * b) * 0.5 if bar else (a - 1j * b) * 0.5


class WirtingerTable:
    """Wirtinger partials of F^2 at one point, read off a full jet.

    Indices are 0-based complex indices.  ``partial(v=[0], vbar=[0])`` is
    d^2 F^2 / dv^1 dvbar^1.
    """

    def __init__(self, jet, n):
        if jet.nvars != 4 * n:
            raise ValueError("Wirtinger table needs a jet seeded in all 4n real coordinates")
        self.jet = jet
        self.n = n

    def derivative(self, z=(), zbar=(), v=(), vbar=()):
        """Jet of the requested Wirtinger derivative (order reduced accordingly)."""
        total = len(z) + len(zbar) + len(v) + len(vbar)
        if total > self.jet.order:
            raise OrderError(f"requested order {total} exceeds jet order {self.jet.order}")
        out = self.jet
        for block, bar, idxs in ((0, False, z), (0, True, zbar), (1, False, v), (1, True, vbar)):
            for i in idxs:
                out = wirtinger_op(out, self.n, block, i, bar)
        return out

    def partial(self, z=(), zbar=(), v=(), vbar=()):
        return complex(self.derivative(z, zbar, v, vbar).value)

    def reality_residual(self):
        """max |conj(dF2/dv) - dF2/dvbar|, same for z, and second-order mixed terms."""
        res = 0.0
        n = self.n
        for block in (0, 1):
            d = wirtinger_grad(self.jet, n, block).value
            db = wirtinger_grad(self.jet, n, block, bar=True).value
            res = max(res, float(np.abs(np.conj(d) - db).max()))
        return res


def wirtinger(jet, n):
    return WirtingerTable(jet, n)


# ---------------------------------------------------------------------------
# finite differences

_STENCILS = {
    0: {0: 1.0},
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
    4: {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0},
}

FD_STEP = 0.03
FD_LEVELS = 3


def _product_stencil(exps):
    """Offsets (integer vectors) and weights of a tensor-product central stencil."""
    factors = [list(_STENCILS[int(a)].items()) for a in exps]
    out = {}
    for combo in itertools.product(*factors):
        off = tuple(o for o, _ in combo)
        w = math.prod(wt for _, wt in combo)
        out[off] = out.get(off, 0.0) + w
    return out


@lru_cache(maxsize=None)
def _fd_plan(m, order):
    """Sparse weight matrix (monomials x offsets) for every partial up to ``order``."""
    exps = _basis(m)[0][: n_monomials(m, order)]
    offsets = {}
    rows, cols, vals = [], [], []
    for r, e in enumerate(exps):
        support = np.flatnonzero(e)
        local = _product_stencil(e[support])
        for off, w in local.items():
            full = [0] * m
            for s, o in zip(support, off):
                full[s] = o
            key = tuple(full)
            c = offsets.setdefault(key, len(offsets))
            rows.append(r)
            cols.append(c)
            vals.append(w)
    W = sp.csr_matrix((vals, (rows, cols)), shape=(len(exps), len(offsets)))
    return W, np.array(list(offsets), dtype=float).reshape(len(offsets), m), exps.sum(axis=1)


def _eval_batch(metric, p, coords, offsets, h):
    """F^2 at p displaced by ``h * offsets`` in the given real coordinates."""
    n = p.n
    base = np.concatenate([p.x, p.y])
    pts = np.repeat(base[:, None], offsets.shape[0], axis=1)
    pts[list(coords)] += h * offsets.T
    x, y = pts[: 2 * n], pts[2 * n:]
    z = x[:n] + 1j * x[n:]
    v = y[:n] + 1j * y[n:]
    if not metric.domain_ok(z, v):
        raise DomainError(f"{metric.label}: finite-difference stencil leaves the domain (h={h:g})")
    vals = np.asarray(metric.evaluator(list(z), list(v)))
    return np.real(vals) * np.ones(offsets.shape[0])


def _richardson(estimates):
    """Combine central-difference estimates at h, h/2, h/4, ... (even error powers)."""
    table = list(estimates)
    power = 2
    while len(table) > 1:
        fac = 2.0 ** power
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
        power += 2
    return table[0]


def _fd_derivatives(metric, p, coords, order, h, levels):
    m = len(coords)
    W, offsets, deg = _fd_plan(m, order)
    ests = []
    for lev in range(levels):
        hh = h / 2 ** lev
        f = _eval_batch(metric, p, coords, offsets, hh)
        ests.append((W @ f) / hh ** deg)
    return _richardson(ests)


def fd_oracle(metric, p, dirs, order=None, h=FD_STEP, levels=FD_LEVELS):
    """Central finite-difference estimate of a mixed real partial of F^2."""
    dirs = [coord_index(d, p.n) for d in dirs]
    if order is None:
        order = len(dirs)
    if order != len(dirs):
        raise ValueError(f"order {order} does not match {len(dirs)} directions")
    if order > MAX_ORDER:
        raise OrderError(f"order {order} exceeds {MAX_ORDER}")
    seeded = list(dict.fromkeys(dirs))
    if not seeded:
        return metric.f2(p.z, p.v)
    exps = np.zeros(len(seeded), dtype=np.int64)
    for d in dirs:
        exps[seeded.index(d)] += 1
    _, offsets, _ = _fd_plan(len(seeded), order)
    stencil = _product_stencil(exps)
    off = np.array(list(stencil), dtype=float)
    w = np.array(list(stencil.values()))
    ests = []
    for lev in range(levels):
        hh = h / 2 ** lev
        f = _eval_batch(metric, p, seeded, off, hh)
        ests.append(float(w @ f) / hh ** order)
    return float(_richardson(ests))


def fd_jet(metric, p, order=MAX_ORDER, h=FD_STEP, levels=FD_LEVELS):
    """Jet of F^2 in all 4n coordinates whose coefficients come from finite differences."""
    metric.check_domain(p)
    m = 4 * p.n
    partials = _fd_derivatives(metric, p, range(m), order, h, levels)
    fact = _basis(m)[5][: n_monomials(m, order)]
    partials[0] = metric.f2(p.z, p.v)
    return Jet(partials / fact, m, order)


def fd_agreement(metric, p, order=MAX_ORDER, h=FD_STEP, levels=FD_LEVELS):
    """Per-order error of jet partials against finite differences.

    Returns ``{k: max|jet - fd| / max|jet|}`` over all partials of total order k,
    the scale floor being 1 so flat orders report an absolute error.
    """
    jet = metric_jet(metric, p, order)
    fd = fd_jet(metric, p, order, h, levels)
    a, b, deg = jet.partials(), fd.partials(), jet.degrees()
    out = {}
    for k in range(order + 1):
        sel = deg == k
        scale = max(1.0, float(np.abs(a[sel]).max()))
        out[k] = float(np.abs(a[sel] - b[sel]).max() / scale)
    return out
