import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dunklmc.rootsys import build_root_system


@pytest.fixture(scope="session")
def z2_pair():
    """Z2^2 with k = (0.7, 0.7): the workhorse system of the checks."""
    return build_root_system("z2_product", 2, [0.7, 0.7])


@pytest.fixture(scope="session")
def z2_mixed():
    return build_root_system("z2_product", 2, [0.5, 1.0])


@pytest.fixture(scope="session")
def a3():
    return build_root_system("a_type", 3, [0.7])


@pytest.fixture(scope="session")
def dihedral3():
    return build_root_system("dihedral", 2, [0.8], dihedral_m=3)


@pytest.fixture(scope="session")
def brownian2():
    return build_root_system("z2_product", 2, [0.0, 0.0])


@pytest.fixture()
def rng():
    return np.random.default_rng(20240331)
