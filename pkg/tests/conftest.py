import numpy as np
import pytest

from sqglab.spectral import Field, make_grid


@pytest.fixture
def grid64():
    return make_grid(64, 2 * np.pi)


@pytest.fixture
def grid_lattice():
    """Integer torus with unit-lattice alignment, for uloc machinery."""
    return make_grid(128, 16.0)


def random_field(grid, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.shape)
    return Field(grid, scale * vals)


def smooth_random_field(grid, seed=0, beta=3.0, target_linf=1.0):
    """Band-dominated random field via the data generator."""
    from sqglab.initial_data import DataRecipe, generate_w0

    return generate_w0(
        DataRecipe(seed=seed, beta=beta, s=0.6, target_linf=target_linf),
        grid,
    )
