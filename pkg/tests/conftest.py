"""Shared fixtures: small grids and canonical fields used across the suite."""

import numpy as np
import pytest

from ctns import (
    CoefficientSet,
    ScalarField,
    State,
    VectorField,
    make_grid,
)
from ctns.coefficients import k_saturating, potential_zero


@pytest.fixture
def grid():
    return make_grid(32, 32)


@pytest.fixture
def grid_aniso():
    return make_grid(32, 64, lx=2.0, ly=1.0)


@pytest.fixture
def grid_square():
    return make_grid(32, 32, bc="square_neumann")


@pytest.fixture
def coeffs():
    return CoefficientSet()


@pytest.fixture
def coeffs_saturating():
    return CoefficientSet(k=k_saturating(1.0))


@pytest.fixture
def coeffs_quiet():
    """No external force; the velocity decouples from the scalars."""
    return CoefficientSet(phi=potential_zero())


def smooth_scalar(grid, seed=0, base=1.0, amplitude=0.3, cutoff=5):
    """Seeded band-limited positive scalar field."""
    rng = np.random.default_rng(seed)
    xx, yy = grid.meshgrid()
    out = np.full(grid.shape, float(base))
    for _ in range(6):
        jx = int(rng.integers(-cutoff, cutoff + 1))
        jy = int(rng.integers(0, cutoff + 1))
        ph = rng.uniform(0, 2 * np.pi)
        amp = amplitude * rng.uniform(0.1, 1.0) / 6.0
        out += amp * np.cos(2 * np.pi * (jx * xx / grid.lx + jy * yy / grid.ly) + ph)
    return ScalarField(grid, out)


def solenoidal_velocity(grid, seed=0, amplitude=0.5, cutoff=5):
    """Seeded band-limited divergence-free velocity from a random stream function."""
    rng = np.random.default_rng(seed)
    xx, yy = grid.meshgrid()
    psi = np.zeros(grid.shape)
    for _ in range(6):
        jx = int(rng.integers(-cutoff, cutoff + 1))
        jy = int(rng.integers(1, cutoff + 1))
        ph = rng.uniform(0, 2 * np.pi)
        psi += rng.uniform(0.1, 1.0) * np.cos(
            2 * np.pi * (jx * xx / grid.lx + jy * yy / grid.ly) + ph)
    # u = (psi_y, -psi_x) is divergence-free for any stream function
    from ctns.operators import gradient

    gp = gradient(ScalarField(grid, psi))
    sup = max(float(np.max(np.sqrt(gp.x ** 2 + gp.y ** 2))), 1e-300)
    return VectorField(grid, amplitude * gp.y / sup, -amplitude * gp.x / sup)


def small_state(grid, seed=0, u_amplitude=0.5):
    n = smooth_scalar(grid, seed=seed, base=1.0, amplitude=0.4)
    c = smooth_scalar(grid, seed=seed + 1, base=0.5, amplitude=0.3)
    u = solenoidal_velocity(grid, seed=seed + 2, amplitude=u_amplitude)
    return State(ScalarField(grid, np.maximum(n.values, 0.05)),
                 ScalarField(grid, np.clip(c.values, 0.0, 1.0)), u)
