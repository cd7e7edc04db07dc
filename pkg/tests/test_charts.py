import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import sample_points
from kbfinsler.charts import (Biholomorphism, identity_map, linear_map, pushforward_metric, quadratic_map,
                              transform_laws, transform_residuals)
from kbfinsler.connections import PointTables
from kbfinsler.errors import DimensionError, HypothesisError, ParamError
from kbfinsler.metrics import SamplePlan, make_metric, validate

A_LIN = np.array([[1.0 + 0.5j, 0.3], [-0.2j, 0.8 - 0.1j]])


def test_forward_inverse_roundtrip():
    phi = quadratic_map(3, eps=0.1, A=np.diag([1.0, 2.0j, 0.5]))
    rng = np.random.default_rng(0)
    for _ in range(20):
        z = (rng.standard_normal(3) + 1j * rng.standard_normal(3)) * 0.5
        w = np.array(phi.forward(list(z)))
        assert np.abs(np.array(phi.inverse(list(w))) - z).max() <= 1e-10


def test_inverse_tangent_is_inverse_jacobian():
    phi = quadratic_map(2, eps=0.2, A=A_LIN)
    z = np.array([0.3 - 0.1j, 0.2j])
    w = np.array(phi.forward(list(z)))
    u = np.array([1.0, -0.5j])
    _, dz = phi.inverse(list(w), list(u))
    np.testing.assert_allclose(np.array(dz), np.linalg.solve(phi.jacobian(z), u), atol=1e-12)


def test_jacobian_and_hessian_against_differences():
    phi = quadratic_map(2, eps=0.3)
    z = np.array([0.2 + 0.1j, -0.3j])
    h = 1e-6
    J = phi.jacobian(z)
    for k in range(2):
        e = np.eye(2)[k] * h
        col = (np.array(phi.forward(list(z + e))) - np.array(phi.forward(list(z - e)))) / (2 * h)
        np.testing.assert_allclose(J[:, k], col, atol=1e-8)
    H = phi.hessian(z)
    assert H[1, 0, 0] == pytest.approx(2 * 0.3) and np.abs(H[0]).max() == 0


def test_construction_errors():
    with pytest.raises(ParamError):
        Biholomorphism(np.array([[1.0, 1.0], [1.0, 1.0]]), np.zeros(2))
    bad = np.zeros((2, 2, 2))
    bad[0, 1, 1] = 1.0
    with pytest.raises(ParamError):
        Biholomorphism(np.eye(2), np.zeros(2), 0.1, bad)
    with pytest.raises(DimensionError):
        pushforward_metric(make_metric("bergman", n=2), identity_map(3))


def test_pushforward_examples(euclid2, bergman2):
    m = pushforward_metric(euclid2, identity_map(2))
    for p in sample_points(euclid2, 4):
        assert m.f2(p.z, p.v) == euclid2.f2(p.z, p.v)
    m = pushforward_metric(euclid2, linear_map(2 * np.eye(2)))
    assert m.f2([0.4, 0.2], [1.0, 1j]) == pytest.approx(0.5)
    q = pushforward_metric(bergman2, quadratic_map(2, eps=0.05))
    rep = validate(q, SamplePlan(count=8, radius=0.6))
    assert rep.admissible


def test_euclidean_linear_change_is_trivial(euclid2):
    for p in sample_points(euclid2, 2):
        assert max(transform_residuals(euclid2, linear_map(A_LIN), p)) <= 1e-10


@pytest.mark.parametrize("phi", [linear_map(A_LIN), quadratic_map(2, eps=0.05)], ids=["linear", "quadratic"])
def test_bergman_transformation_laws(bergman2, phi):
    for p in sample_points(bergman2, 4, radius=0.6):
        assert max(transform_residuals(bergman2, phi, p)) <= 1e-7


def test_hypothesis_guard(nonkahler, stressed_point):
    with pytest.raises(HypothesisError):
        transform_residuals(nonkahler, linear_map(A_LIN), stressed_point)
    res = transform_residuals(nonkahler, linear_map(A_LIN), stressed_point, check_hypothesis=False)
    assert all(np.isfinite(res))


@given(st.integers(0, 1000), st.floats(-1, 1), st.floats(-1, 1))
def test_vertical_law_ignores_hessian(seed, a, b):
    rng = np.random.default_rng(seed)
    nl = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    hz = rng.standard_normal((2, 2, 2)) + 1j * rng.standard_normal((2, 2, 2))
    vt = rng.standard_normal((2, 2, 2)) + 1j * rng.standard_normal((2, 2, 2))
    P = np.eye(2) + 0.3 * rng.standard_normal((2, 2))
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    H = np.zeros((2, 2, 2), dtype=complex)
    H2 = H.copy()
    H2[1, 0, 0] = a + 1j * b
    c1 = transform_laws((nl, hz, vt), v, P, H)[2]
    c2 = transform_laws((nl, hz, vt), v, P, H2)[2]
    np.testing.assert_array_equal(c1, c2)


def test_contracted_horizontal_law_reproduces_nonlinear_law(bergman2):
    phi = quadratic_map(2, eps=0.05, A=A_LIN)
    for p in sample_points(bergman2, 3):
        N = PointTables(bergman2, p, order=3).n_coeffs
        P = phi.jacobian(p.z)
        ra, rb, _ = transform_laws((N.nonlinear, N.horizontal, N.vertical), p.v, P, phi.hessian(p.z))
        vB = P @ p.v
        assert np.abs(np.einsum("bag,a->bg", ra, vB) - rb).max() <= 1e-8
