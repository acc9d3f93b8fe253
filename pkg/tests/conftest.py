import numpy as np
import pytest


def crandn(rng, rows, cols):
    """Complex standard normal matrix."""
    z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return z / np.sqrt(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
