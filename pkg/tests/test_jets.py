import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kbfinsler.errors import DomainError, OrderError
from kbfinsler.jets import Jet, abs2, conj, jeinsum, jinv, power, seed, sqrt, stack

finite = st.floats(-3, 3, allow_nan=False)
positive = st.floats(0.2, 4, allow_nan=False)


def univariate(f, x0, order=4):
    (u,) = seed([x0], order)
    out = f(u)
    return [float(np.real(out.partial([k]))) for k in range(order + 1)]


def test_cubic_derivatives():
    assert univariate(lambda u: u * u * u, 1.5) == pytest.approx([3.375, 6.75, 9.0, 6.0, 0.0])


def test_sqrt_derivatives_closed_form():
    x = 2.0
    expect = [x ** 0.5, 0.5 * x ** -0.5, -0.25 * x ** -1.5, 0.375 * x ** -2.5, -0.9375 * x ** -3.5]
    assert univariate(sqrt, x) == pytest.approx(expect, rel=1e-13)


def test_reciprocal_derivatives_closed_form():
    x = 0.7
    expect = [(-1) ** k * math.factorial(k) / x ** (k + 1) for k in range(5)]
    assert univariate(lambda u: 1.0 / u, x) == pytest.approx(expect, rel=1e-13)


def test_mixed_partial_of_monomial():
    a, b = seed([1.3, -0.4], 4)
    f = a * a * b * b * b
    # d/da d^2/db^2 (a^2 b^3) = 2a * 6b
    assert f.partial([1, 2]) == pytest.approx(12 * 1.3 * -0.4)
    assert f.partial([2, 2]) == pytest.approx(2 * 6 * -0.4)


def test_order_limit():
    with pytest.raises(OrderError):
        Jet.constant(1.0, 2, 5)
    (u,) = seed([1.0], 2)
    with pytest.raises(OrderError):
        u.partial([3])


def test_branch_floor_rejected():
    (u,) = seed([0.0], 3)
    with pytest.raises(DomainError):
        sqrt(u)
    with pytest.raises(DomainError):
        power(u - 1.0, Fraction(1, 3))


def test_negative_base_integer_power():
    (u,) = seed([-2.0], 3)
    assert power(u, 2).value == pytest.approx(4.0)
    assert power(u, Fraction(2)).value == pytest.approx(4.0)
    assert power(np.array(-2.0), Fraction(2)) == pytest.approx(4.0)


def test_zero_seeding_reproduces_plain_value():
    x = np.array([0.3, -1.2])
    jets = [Jet.constant(v, 0, 4) for v in x]
    f = jets[0] * jets[1] + sqrt(abs2(jets[1]))
    assert f.value == 0.3 * -1.2 + abs(-1.2)


@given(finite, finite, finite)
def test_ring_axioms(a0, b0, c0):
    a, b, c = seed([a0, b0, c0], 4)
    lhs = a * (b + c)
    rhs = a * b + a * c
    np.testing.assert_allclose(lhs.coef, rhs.coef, atol=1e-12)
    np.testing.assert_allclose((a * b).coef, (b * a).coef, atol=0)
    np.testing.assert_allclose(((a * b) * c).coef, (a * (b * c)).coef, atol=1e-12)


@given(positive, positive)
def test_division_inverts_multiplication(a0, b0):
    a, b = seed([a0, b0], 4)
    q = (a * b) / b
    np.testing.assert_allclose(q.coef, a.coef, atol=1e-11)


@given(positive)
def test_sqrt_squared(x0):
    (u,) = seed([x0], 4)
    np.testing.assert_allclose((sqrt(u) * sqrt(u)).coef, u.coef, atol=1e-12)


@given(finite, finite)
def test_schwarz_symmetry_through_derivs(a0, b0):
    a, b = seed([a0, b0], 4)
    f = a * a * b + sqrt(abs2(a) + b * b + 1.0)
    d_ab = f.deriv(0).deriv(1).value
    d_ba = f.deriv(1).deriv(0).value
    assert abs(d_ab - d_ba) <= 1e-12 * max(1.0, abs(d_ab))


@given(finite, finite)
def test_complex_conj_and_abs2(re0, im0):
    x, y = seed([re0, im0], 3)
    w = x + 1j * y
    np.testing.assert_allclose(abs2(w).coef.imag, 0, atol=1e-15)
    np.testing.assert_allclose(abs2(w).coef.real, (x * x + y * y).coef, atol=1e-12)
    np.testing.assert_allclose(conj(conj(w)).coef, w.coef)


def test_chain_rule_against_finite_differences():
    def f(a, b):
        return power(a * a + 2.0 * b * b + 1.0, Fraction(3, 2)) / (1.0 + a * b * b)

    x0 = np.array([0.4, -0.3])
    a, b = seed(x0, 2)
    jet = f(a, b)
    h = 1e-4

    def val(x):
        return float(np.asarray(f(np.array(x[0]), np.array(x[1]))))

    for i in range(2):
        e = np.eye(2)[i] * h
        fd = (val(x0 + e) - val(x0 - e)) / (2 * h)
        assert jet.deriv(i).value == pytest.approx(fd, rel=1e-7)
        fd2 = (val(x0 + e) - 2 * val(x0) + val(x0 - e)) / h ** 2
        assert jet.partial(list(np.eye(2, dtype=int)[i] * 2)) == pytest.approx(fd2, rel=1e-5)


def test_jinv_matches_numpy_inverse_derivative():
    # d/dt M(t)^{-1} = -M^{-1} M' M^{-1}
    (t,) = seed([0.0], 2)
    M0 = np.array([[2.0, 0.3], [0.3, 1.0]])
    M1 = np.array([[0.5, -0.2], [-0.2, 0.1]])
    M = stack([stack([M0[i, j] + M1[i, j] * t for j in range(2)]) for i in range(2)])
    inv, cond = jinv(M)
    Mi = np.linalg.inv(M0)
    np.testing.assert_allclose(inv.value, Mi, atol=1e-14)
    np.testing.assert_allclose(inv.deriv(0).value, -Mi @ M1 @ Mi, atol=1e-13)
    np.testing.assert_allclose(inv.partial([2]), 2 * Mi @ M1 @ Mi @ M1 @ Mi, atol=1e-12)
    assert cond == pytest.approx(np.linalg.cond(M0))


def test_jeinsum_matches_elementwise():
    a, b = seed([1.0, 2.0], 3)
    A = stack([a, b, a * b])
    B = stack([b, b, a])
    dot = jeinsum("i,i->", A, B)
    direct = a * b + b * b + a * b * a
    np.testing.assert_allclose(dot.coef, direct.coef, atol=1e-13)


def test_partials_and_degrees_helpers():
    a, b = seed([0.5, 1.5], 4)
    f = a * a * b
    deg = f.degrees()
    assert deg[0] == 0 and deg.max() == 4
    P = f.partials()
    assert P[0] == pytest.approx(0.375)
    assert np.count_nonzero(deg == 1) == 2
