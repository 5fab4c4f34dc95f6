import sys
from os import path

import numpy as np
import pytest

sys.path.append(path.dirname(path.dirname(path.abspath(__file__))))
from ionbath.fock import FockSpace
from ionbath.validation import random_state

CONFIG_DIR = path.join(path.dirname(path.dirname(path.abspath(__file__))), "configs")


@pytest.fixture(scope="session")
def space40():
    return FockSpace(40)


@pytest.fixture(scope="session")
def space10():
    return FockSpace(10)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_pairs(rng):
    space = FockSpace(6)
    return [(random_state(space, rng), random_state(space, rng, rank=2)) for _ in range(20)]


@pytest.fixture(scope="session")
def config_dir():
    return CONFIG_DIR
