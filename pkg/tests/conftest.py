import numpy as np
import pytest

from conelab import ConeGeometry
from conelab.cone import ConeModel


@pytest.fixture(scope="session")
def small_model():
    """Coarse cone model shared by the functional tests."""
    return ConeModel(ConeGeometry(N=96))


@pytest.fixture(scope="session")
def default_model():
    """The default geometry; built once, reused by the acceptance suite."""
    return ConeModel(ConeGeometry())


@pytest.fixture(scope="session")
def doubled_model(default_model):
    return ConeModel(default_model.geometry.doubled())


def random_hermitian(seed: int, dim: int):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (g + g.conj().T)
