import itertools

import pytest
from hypothesis import HealthCheck, settings

from ptlattice import LatticeSpec

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GRID_N = (2, 3, 4, 5, 6)
GRID_NS = (0, 1, 2)
GRID_GAMMA = (0.2, 0.5, 0.9, 1.5)


def acceptance_grid():
    return [LatticeSpec.uniform(N, Ns, gamma) for N, Ns, gamma in itertools.product(GRID_N, GRID_NS, GRID_GAMMA)]


@pytest.fixture
def grid():
    return acceptance_grid()
