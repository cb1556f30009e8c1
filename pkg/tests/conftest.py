import numpy as np
import pytest

from llgvm import PeriodicGrid, VectorField3
from llgvm.magnetization import MagnetizationField
from llgvm.textures import random_smooth_unit

BOX = 16.0


@pytest.fixture(scope="session")
def grid16():
    return PeriodicGrid.cubic(16, BOX)


@pytest.fixture(scope="session")
def grid32():
    return PeriodicGrid.cubic(32, BOX)


def band_limited_vector(grid, seed, k_cut=3, amplitude=1.0):
    """Random real vector field with modes |n_i| <= k_cut only."""
    rng = np.random.default_rng(seed)
    spec = np.fft.fftn(rng.standard_normal((3, *grid.shape)), axes=(-3, -2, -1))
    for axis, n in enumerate(grid.n_cells):
        idx = np.abs(np.fft.fftfreq(n) * n)
        shape = [1, 1, 1]
        shape[axis] = n
        spec *= (idx <= k_cut).reshape(shape)
    vals = np.fft.ifftn(spec, axes=(-3, -2, -1)).real
    vals *= amplitude / np.sqrt(np.mean(vals**2))
    return VectorField3(grid, vals)


def band_limited_scalar(grid, seed, k_cut=3, amplitude=1.0):
    return band_limited_vector(grid, seed, k_cut, amplitude).component(0)


def random_unit_mf(grid, seed, amplitude=0.05, k_cut=1, h=0.5, alpha=0.1):
    return MagnetizationField(grid, random_smooth_unit(grid, seed, amplitude, k_cut), h, alpha)


def rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    """||a - b||_2 / ||b||_2 over raw arrays."""
    return float(np.sqrt(np.sum((a - b) ** 2) / np.sum(b**2)))
