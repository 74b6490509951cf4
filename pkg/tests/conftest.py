import numpy as np
import pytest

from dmpvol.dmp import learn_from_demo
from dmpvol.experiments import spiral_demo

# Lines reported by the acceptance suite, printed once at the end of the run.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def spiral():
    return spiral_demo(1e-3)


@pytest.fixture(scope="session")
def spiral_model(spiral):
    return learn_from_demo(spiral, 1050.0, 4.0, 50)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def central_gradient(f, x, h=1e-6):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g
