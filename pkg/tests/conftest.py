import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from semcert.models import (
    GaussianWalkSpec,
    IntervalChainSpec,
    XiChainSpec,
    build_gaussian_walk,
    build_interval_chain,
    build_xi_chain,
)

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def record_criterion():
    """``record(number, passed, text)`` stores and prints one acceptance line."""
    def record(number, passed, text):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {text}"
        ACCEPTANCE_LINES[number] = line
        print(line)
    return record


@pytest.fixture(scope="session")
def xi_kernel():
    return build_xi_chain(XiChainSpec(0.4, 40))


@pytest.fixture(scope="session")
def gaussian_kernel():
    return build_gaussian_walk(GaussianWalkSpec(8.0, 0.01))


@pytest.fixture(scope="session")
def coarse_gaussian():
    return build_gaussian_walk(GaussianWalkSpec(6.0, 0.05))


@pytest.fixture(scope="session")
def interval_kernel():
    return build_interval_chain(IntervalChainSpec(3001))


@pytest.fixture(scope="session")
def small_interval():
    return build_interval_chain(IntervalChainSpec(301))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
