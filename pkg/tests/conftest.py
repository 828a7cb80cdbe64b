import numpy as np
import pytest

from anelastic_lab import PhysParams, make_grid, solve_background
from anelastic_lab.templates import random_bandlimited, scalar_template


@pytest.fixture(scope="session")
def grid2d():
    return make_grid(2, 32)


@pytest.fixture(scope="session")
def grid64():
    return make_grid(2, 64)


@pytest.fixture(scope="session")
def params():
    return PhysParams(a=0.5, gamma=2.0, mu=0.05, kappa=0.25, epsilon=0.2)


@pytest.fixture(scope="session")
def bg2d(grid2d, params):
    """Variable background from a smooth cosine potential (mean normalization)."""
    return solve_background(scalar_template(grid2d, "cosine", 0.2), grid2d, params, "mean", 1.0)


@pytest.fixture(scope="session")
def bg64(grid64, params):
    return solve_background(scalar_template(grid64, "cosine", 0.2), grid64, params, "mean", 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def band(grid, mode=4, seed=0, components=None):
    return random_bandlimited(grid, mode, seed=seed, components=components)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
