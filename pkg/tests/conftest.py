import sys

import numpy as np
import pytest

from choquard.grid import make_grid
from choquard.model import ProblemSpec
from choquard.solver import SolverConfig, minimize_ground_state


@pytest.fixture(scope="session")
def gs_3d():
    """Ground state for N=3, alpha=2, p=2 on the M=32, L=16 box."""
    spec = ProblemSpec.power(3, 2.0, 2.0)
    return spec, minimize_ground_state(spec, make_grid(3, 32, 16.0), SolverConfig())


@pytest.fixture(scope="session")
def gs_3d_wide():
    """Same problem on a box wide enough that the tail is below 3e-4 of the peak."""
    spec = ProblemSpec.power(3, 2.0, 2.0)
    return spec, minimize_ground_state(spec, make_grid(3, 48, 24.0), SolverConfig())


@pytest.fixture(scope="session")
def gs_2d():
    spec = ProblemSpec.power(2, 1.0, 2.5)
    return spec, minimize_ground_state(spec, make_grid(2, 64, 20.0), SolverConfig())


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
