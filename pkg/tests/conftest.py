import numpy as np
import pytest

from yule_ou.models.ou_params import OuParams
from yule_ou.models.path_pair import PathPair
from yule_ou.models.sample_grid import SampleGrid
from yule_ou.models.scheme import Scheme
from yule_ou.services.ou_simulation_service import simulate_exact


def observed_pair(x1, x2, delta: float = 0.1) -> PathPair:
    x1 = np.asarray(x1, dtype=np.float64)
    return PathPair(
        grid=SampleGrid(n=x1.size - 1, delta=delta),
        x1=x1,
        x2=x2,
        scheme=Scheme.OBSERVED,
        x0=None,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def ou_pair() -> PathPair:
    return simulate_exact(OuParams(theta=1.0), SampleGrid(n=1000, delta=0.01), seed=7)
