import numpy as np
import pytest

from pluripot import MultiIndexBasis, interval, make_grid, simplex


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def cheb64():
    return make_grid("interval", -1, 1, "chebyshev", 64)


@pytest.fixture(scope="session")
def unit_interval():
    return interval(0, 1)


@pytest.fixture(scope="session")
def basis4(unit_interval):
    return MultiIndexBasis.build(unit_interval, 4)


@pytest.fixture(scope="session")
def simplex2():
    return simplex(2)
