import numpy as np
import pytest

from ldpclab import codes, tanner


@pytest.fixture(scope="session")
def toy_graph():
    """H = [[1,1,0,1],[0,1,1,1]]: N=4, M=2, E=6."""
    return tanner.from_matrix(np.array([[1, 1, 0, 1], [0, 1, 1, 1]]))


@pytest.fixture(scope="session")
def four_cycle_graph():
    """H = [[1,1],[1,1]]: a single 4-cycle."""
    return tanner.from_matrix(np.array([[1, 1], [1, 1]]))


@pytest.fixture(scope="session")
def ccsds():
    return codes.ccsds_128_64()


@pytest.fixture(scope="session")
def reg64():
    return codes.reg64_3_6()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
