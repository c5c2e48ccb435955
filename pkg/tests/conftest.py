"""Shared fixtures."""

import numpy as np
import pytest

from src.games.davie_reeds import solve_constants
from src.games.strip_games import build_strip_pair, constant_strip, fig1_middle_breakpoint, square_wave

SEED = 20240229


@pytest.fixture(scope="session")
def constants():
    return solve_constants()


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def left_pair():
    """Strip pair with h = +1 on the whole strip."""
    return build_strip_pair(constant_strip(1))


@pytest.fixture(scope="session")
def middle_pattern():
    return square_wave([fig1_middle_breakpoint()])


@pytest.fixture(scope="session")
def middle_pair(middle_pattern):
    return build_strip_pair(middle_pattern)
