import numpy as np
import pytest

from qlocker import StateVector


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240817)


def random_qubit_state(rng) -> StateVector:
    """Haar-ish random single-qubit state for property sweeps."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return StateVector(1, v)
