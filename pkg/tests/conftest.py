import numpy as np
import pytest
from hypothesis import settings

from maxwell_relax.core import PhysParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def params():
    return PhysParams()


def random_field(rng, cells, ncomp=10, amp=0.1):
    U = amp * rng.standard_normal((ncomp,) + tuple(cells))
    U[0] = 1.0 + 0.2 * rng.random(tuple(cells))
    return U


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
