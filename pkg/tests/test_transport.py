import numpy as np
import pytest

from kbfinsler.errors import DomainError, StiffnessError
from kbfinsler.geometry import PointState
from kbfinsler.metrics import make_metric
from kbfinsler.transport import (Curve, integrate_geodesic, j_commutation_residual, parallel_transport,
                                 self_parallel_residual, type_preservation_residual, type_residual_history)

B1 = make_metric("bergman", n=1, c=-4)


def unit_start(metric, z, v):
    p = PointState.from_complex(z, v)
    return p.x, p.y / np.sqrt(metric.f2(p.z, p.v))


def test_euclidean_geodesic_is_straight(euclid2):
    x0, y0 = np.array([0.1, -0.2, 0.3, 0.0]), np.array([1.0, 0.5, -0.25, 2.0])
    rec = integrate_geodesic(euclid2, x0, y0, T=1.0, steps=20)
    np.testing.assert_allclose(rec.x, x0 + rec.t[:, None] * y0, atol=1e-12)


def test_poincare_geodesic_and_energy():
    rec = integrate_geodesic(B1, [0, 0], [1, 0], T=1.0, steps=200)
    assert rec.x[-1, 0] == pytest.approx(np.tanh(1.0), abs=1e-8)
    assert rec.energy_drift <= 1e-8
    np.testing.assert_allclose(rec.x[:, 0], np.tanh(rec.t), atol=1e-8)


def test_bergman_geodesic_energy_conservation(bergman2):
    x0, y0 = unit_start(bergman2, [0.2, -0.1j], [0.6, 0.8 + 0.3j])
    rec = integrate_geodesic(bergman2, x0, y0, T=1.0, steps=200)
    assert rec.energy_drift <= 1e-8


def test_fourth_order_convergence():
    errs = [abs(integrate_geodesic(B1, [0, 0], [1, 0], 1.0, s).x[-1, 0] - np.tanh(1.0)) for s in (20, 40, 80)]
    assert 12 <= errs[0] / errs[1] <= 20
    assert 12 <= errs[1] / errs[2] <= 20


def test_leaving_domain_reports_exit_time():
    with pytest.raises(DomainError) as exc:
        integrate_geodesic(B1, [0.9, 0], [50.0, 0], T=1.0, steps=10)
    assert 0 <= exc.value.exit_time < 1.0


def test_step_doubling_flags_coarse_steps():
    with pytest.raises(StiffnessError):
        integrate_geodesic(B1, [0, 0], [3.0, 0], T=1.0, steps=10, error_bound=1e-12)
    rec = integrate_geodesic(B1, [0, 0], [1, 0], T=1.0, steps=100, error_bound=1e-6)
    assert rec.x[-1, 0] == pytest.approx(np.tanh(1.0), abs=1e-9)


def test_minimum_step_count():
    with pytest.raises(ValueError):
        integrate_geodesic(B1, [0, 0], [1, 0], steps=5)


def test_euclidean_transport_is_constant(euclid2):
    curve = Curve.analytic(lambda t: np.array([np.cos(t), np.sin(t), t, 0.0]) * 0.3,
                           lambda t: np.array([-np.sin(t), np.cos(t), 1.0, 0.0]) * 0.3)
    V0 = np.array([1.0, 2.0, -1.0, 0.5])
    res = parallel_transport(euclid2, curve, V0, steps=20)
    np.testing.assert_allclose(res.V[:, :, 0], np.tile(V0, (21, 1)), atol=0)
    assert type_preservation_residual(euclid2, curve, np.array([1.0, 1j]), steps=20) == 0
    assert j_commutation_residual(euclid2, curve, V0, steps=20) == 0


def test_transport_is_linear(nonkahler):
    curve = Curve.line([0.0, 0.0, 0.0, 0.5], [0.3, 0.1, 0.0, -0.2])
    rng = np.random.default_rng(3)
    V1, V2 = rng.standard_normal(4), rng.standard_normal(4)
    a, b = 0.7, -1.3
    res = parallel_transport(nonkahler, curve, np.column_stack([V1, V2, a * V1 + b * V2]), steps=40)
    V = res.V
    assert np.abs(V[:, :, 2] - (a * V[:, :, 0] + b * V[:, :, 1])).max() <= 1e-10


def test_bergman_type_preservation_and_metric_compatibility(bergman2):
    x0, y0 = unit_start(bergman2, [0.2, -0.1j], [0.6, 0.8 + 0.3j])
    curve = Curve.geodesic(x0, y0, 1.0)
    seed = np.array([0.3 - 0.2j, 1.0])
    assert type_preservation_residual(bergman2, curve, seed, steps=100) <= 1e-6
    assert j_commutation_residual(bergman2, curve, np.array([1.0, 0, 0.5, -0.2]), steps=100) <= 1e-6
    res = parallel_transport(bergman2, curve, np.column_stack([[1.0, 0, 0.5, -0.2], [0, 1.0, 0, 0.3]]), steps=100)
    assert res.metric_drift() <= 1e-7


def test_geodesic_velocity_is_self_parallel(fubini2):
    x0, y0 = unit_start(fubini2, [0.3, 0.2j], [1.0, -0.4])
    assert self_parallel_residual(fubini2, x0, y0, T=1.0, steps=100) <= 1e-6


def test_nonkahler_breaks_type_preservation(nonkahler):
    x0, y0 = unit_start(nonkahler, [0.0, 0.5], [1.0, 1.0])
    curve = Curve.geodesic(x0, y0, 1.0)
    hist = type_residual_history(nonkahler, curve, np.array([1.0, 1.0]), steps=100)
    assert hist[0] <= 1e-15 and hist.max() > 1e-3
    assert j_commutation_residual(nonkahler, curve, np.array([1.0, 1.0, 0, 0]), steps=100) > 1e-3


def test_type_residual_is_half_j_commutation(nonkahler):
    x0, y0 = unit_start(nonkahler, [0.0, 0.5], [1.0, 1.0])
    curve = Curve.geodesic(x0, y0, 0.5)
    seed = np.array([1.0, 0.5j])
    u = np.concatenate([seed.real, seed.imag])
    t = type_preservation_residual(nonkahler, curve, seed, steps=50)
    j = j_commutation_residual(nonkahler, curve, u, steps=50)
    assert t == pytest.approx(0.5 * j, rel=1e-10)


def test_vector_size_mismatch(bergman2):
    with pytest.raises(ValueError):
        parallel_transport(bergman2, Curve.geodesic([0, 0, 0, 0], [1, 0, 0, 0]), np.ones(3), steps=10)

