import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kbfinsler.geometry import PointState
from kbfinsler.metrics import SamplePlan, make_metric

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bergman2():
    return make_metric("bergman", n=2, c=-4)


@pytest.fixture(scope="session")
def fubini2():
    return make_metric("fubini_study", n=2, c=4)


@pytest.fixture(scope="session")
def minkowski():
    return make_metric("minkowski_tk", n=2, t=0.5, k=2)


@pytest.fixture(scope="session")
def nonkahler():
    return make_metric("hermitian_nonkahler")


@pytest.fixture(scope="session")
def euclid2():
    return make_metric("euclidean", n=2)


@pytest.fixture
def stressed_point():
    """z = (0, 0.5), v = (1, 1): the hand-oracle point of the non-Kahler fixture."""
    return PointState.from_complex([0.0, 0.5], [1.0, 1.0])


def sample_points(metric, count=8, seed=42, radius=None):
    return SamplePlan(count=count, seed=seed, radius=radius).points(metric)


def random_state(rng, n, radius=0.6):
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    z *= radius * rng.uniform() / np.linalg.norm(z)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return PointState.from_complex(z, v)
