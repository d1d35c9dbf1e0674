import pytest

from helpers import FIXTURES, example1
from tdpmc.decomposition import read_td_file
from tdpmc.solver import count


@pytest.fixture
def instance1():
    return example1()


@pytest.fixture
def tprime():
    return read_td_file(FIXTURES / "example1_tprime.td")


@pytest.fixture
def run1(instance1, tprime):
    """Full run of the running example on T' (node t_i has id i-1)."""
    return count(instance1, tprime)
