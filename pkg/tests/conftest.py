import numpy as np
import pytest

from mkp_darboux import FamilyParams, Grid3, auto_grid


@pytest.fixture(scope="session")
def standard():
    """Standard example parameters keyed by family."""
    return {f: FamilyParams.standard(f) for f in (1, 2, 3, 4)}


@pytest.fixture(scope="session")
def grids(standard):
    return {f: auto_grid(p) for f, p in standard.items()}


@pytest.fixture
def small_grid():
    return Grid3(-5.0, 5.0, 41, -1.0, 1.0, 9, -0.5, 0.5, 7)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
