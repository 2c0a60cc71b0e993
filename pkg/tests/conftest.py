import numpy as np
import pytest

from qcount import ModelParams, Thermo, build_modes


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_point(rng, n_sites=1000):
    """One random (mode, thermo) pair from a broad parameter range."""
    params = ModelParams(
        gamma=float(rng.uniform(0.05, 1.5)),
        g=float(rng.uniform(0.0, 2.5)),
        N=n_sites,
    )
    modeset = build_modes(params)
    mode = modeset[int(rng.integers(0, len(modeset)))]
    thermo = Thermo(float(rng.uniform(0.02, 5.0)))
    return mode, thermo
