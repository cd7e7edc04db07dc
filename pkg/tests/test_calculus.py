import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import sample_points
from kbfinsler.calculus import (coord_index, eval_real_partials, fd_agreement, fd_jet, fd_oracle,
                                metric_jet, wirtinger)
from kbfinsler.errors import DomainError, OrderError
from kbfinsler.geometry import PointState
from kbfinsler.metrics import CATALOG, make_metric

E1 = make_metric("euclidean", n=1)
B1 = make_metric("bergman", n=1, c=-4)
P0 = PointState.from_complex([0.0], [1.0])
PH = PointState.from_complex([0.5], [1.0])


def test_coordinate_names():
    assert coord_index("x1", 2) == 0
    assert coord_index("x3", 2) == 2
    assert coord_index("y1", 2) == 4
    assert coord_index(7, 2) == 7
    with pytest.raises(IndexError):
        coord_index("y5", 2)


def test_euclidean_partials():
    assert eval_real_partials(E1, P0, ["y1", "y1"]) == pytest.approx(2.0)
    assert eval_real_partials(E1, P0, ["x1"]) == 0.0


def test_bergman_second_partial_hand_oracle():
    # g_11 = (1-|z|^2)^-2 = 16/9 and d^2F^2/dy^2 = 2 g_11
    assert eval_real_partials(B1, PH, ["y1", "y1"]) == pytest.approx(32 / 9, rel=1e-13)


def test_order_and_domain_errors():
    with pytest.raises(OrderError):
        eval_real_partials(E1, P0, ["y1"] * 5)
    with pytest.raises(DomainError):
        eval_real_partials(B1, PointState.from_complex([1.1], [1.0]), ["y1"])
    with pytest.raises(DomainError):
        PointState.from_complex([0.0], [1e-10])


def test_wirtinger_examples():
    W = wirtinger(metric_jet(E1, P0), 1)
    assert W.partial(v=[0], vbar=[0]) == pytest.approx(1.0)
    W = wirtinger(metric_jet(B1, PH), 1)
    assert W.partial(v=[0], vbar=[0]) == pytest.approx(16 / 9, rel=1e-13)
    assert W.partial(z=[0], vbar=[0]) == pytest.approx(64 / 27, rel=1e-13)


def test_reality_of_wirtinger_table():
    for name in CATALOG:
        m = make_metric(name)
        for p in sample_points(m, 4):
            assert wirtinger(metric_jet(m, p, order=2), m.n).reality_residual() <= 1e-10


def test_fd_oracle_examples():
    assert fd_oracle(E1, P0, ["y1", "y1"]) == pytest.approx(2.0, abs=1e-8)
    assert fd_oracle(B1, PH, ["y1", "y1"]) == pytest.approx(32 / 9, abs=1e-6)


def test_euler_contraction_of_third_y_derivative_vanishes():
    # sum_a y^a d^3F^2/dy^a dy^b dy^c = 0 since d^2F^2/dy dy is 0-homogeneous
    m = make_metric("minkowski_tk", n=2, t=0.5, k=2)
    p = sample_points(m, 1)[0]
    ys = [4, 5, 6, 7]
    for b, c in [(4, 4), (4, 6), (5, 7)]:
        s = sum(p.y[a - 4] * fd_oracle(m, p, [a, b, c]) for a in ys)
        assert abs(s) <= 1e-6


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_jet_agrees_with_fd(name):
    m = make_metric(name)
    for p in sample_points(m, 6, seed=7):
        err = fd_agreement(m, p)
        assert max(err.values()) <= 1e-5, err


def test_fd_jet_structure_matches_metric_jet():
    m = make_metric("fubini_study")
    p = sample_points(m, 1)[0]
    a, b = metric_jet(m, p, 2), fd_jet(m, p, 2)
    assert a.coef.shape == b.coef.shape


def test_schwarz_symmetry_mixed_orders():
    m = make_metric("polydisk_tk")
    p = sample_points(m, 1)[0]
    for dirs in [(0, 5, 6), (1, 2, 4, 7), (3, 3, 6, 5)]:
        base = eval_real_partials(m, p, dirs)
        for perm in itertools.permutations(dirs):
            assert abs(eval_real_partials(m, p, perm) - base) <= 1e-10 * max(1, abs(base))


@given(st.floats(0.1, 5), st.floats(-np.pi, np.pi), st.sampled_from(sorted(CATALOG)))
def test_homogeneity(r, theta, name):
    m = make_metric(name)
    p = sample_points(m, 1, seed=3)[0]
    f = m.f2(p.z, p.v)
    assert abs(m.f2(p.z, r * p.v) - r * r * f) <= 1e-12 * r * r * max(1.0, f)
    lam = r * np.exp(1j * theta)
    assert abs(m.f2(p.z, lam * p.v) - r * r * f) <= 1e-10 * r * r * max(1.0, f)
