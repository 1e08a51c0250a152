import warnings

import numpy as np
import pytest

from lindstruct.generator import LindbladGenerator


def pytest_configure(config):
    warnings.filterwarnings("ignore", message=".*transfer operators exceed.*")


def unit(i, j, d):
    """Matrix unit |i><j| with 1-based indices."""
    m = np.zeros((d, d), dtype=complex)
    m[i - 1, j - 1] = 1.0
    return m


@pytest.fixture
def e():
    return unit


@pytest.fixture
def dissipation():
    return LindbladGenerator(np.zeros((2, 2)), (unit(1, 2, 2), unit(2, 1, 2)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
