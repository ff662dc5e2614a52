import numpy as np
import pytest

from tribubble.integrator import IntegratorConfig
from tribubble.params import PhysicalParams

# synchronous chaos with the default constants (found by a random-IC scan)
CHAOTIC_POINT = (34.18, 1.6717e6)


@pytest.fixture
def params():
    return PhysicalParams()


@pytest.fixture
def cfg():
    return IntegratorConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_states(rng, n):
    r = rng.uniform(0.5, 2.0, size=(n, 3))
    u = rng.uniform(-1.0, 1.0, size=(n, 3))
    return np.hstack([r, u]), rng.uniform(0.0, 10.0, size=n)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
