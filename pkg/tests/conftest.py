import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ratesplit.simulate import grouped_system, uniform_system

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_uniform():
    """A 32-antenna array with 4 users, cheap enough for per-test use."""
    return uniform_system(32, 4, np.pi / 6, 0.3, quadrature_points=64)


@pytest.fixture(scope="session")
def small_grouped():
    """Two groups of two users on a 40-antenna array."""
    return grouped_system(40, [2, 2], np.pi / 8, 0.3, [6, 6], [8, 8], quadrature_points=64)


@pytest.fixture(scope="session")
def disjoint_system():
    return grouped_system(100, [3, 3, 3, 3], np.pi / 8, 0.4, [15] * 4, [20] * 4)


@pytest.fixture(scope="session")
def overlap_system():
    return grouped_system(100, [3, 3, 3, 3], np.pi / 3, 0.4, [15] * 4, [20] * 4)
