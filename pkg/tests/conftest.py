import math

import numpy as np
import pytest

from tatrec.experiment import ExperimentConfig, build_setup
from tatrec.wave import GridSpec


@pytest.fixture(scope="session")
def tiny_setup():
    """Shepp-Logan acquisition at 32 cells across the object (about 90 steps)."""
    return build_setup(ExperimentConfig(scale=32))


@pytest.fixture(scope="session")
def tiny_cfg():
    return ExperimentConfig(scale=32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def bump(grid: GridSpec, x=0.0, y=0.0, width=0.08):
    X, Y = grid.mesh()
    return np.exp(-((X - x) ** 2 + (Y - y) ** 2) / (2 * width**2))


def unit_grid(n=64, half=0.5):
    return GridSpec(n, n, 2 * half / n, -half, -half)


SQRT2 = math.sqrt(2)
