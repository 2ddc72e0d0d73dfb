"""State builders shared between propagation and acceptance tests."""

import numpy as np

from tdqmc.ensemble import KernelConfig, WalkerCloud
from tdqmc.grids import WaveFn1D, normalize
from tdqmc.potentials import SoftCoreParams
from tdqmc.propagation import EnsembleState

FREE = SoftCoreParams(a=0.0, b=0.0)


def gaussian_wave(grid, sigma=1.0, x0=0.0, p=0.0):
    x = grid.points
    return normalize(WaveFn1D(grid, np.exp(-((x - x0) ** 2) / (4 * sigma**2)
                                           + 1j * p * x)))


def make_state(grid, m=16, params=FREE, sigma0=1.0, seed=0, alpha=(1.0, 1.0)):
    rng = np.random.default_rng(seed)
    w = gaussian_wave(grid, sigma=sigma0)
    waves = np.tile(w.values, (2, m, 1))
    clouds = [WalkerCloud(i, rng.normal(0.0, sigma0, m)) for i in range(2)]
    kernel = KernelConfig(alpha=alpha, sigma=(sigma0, sigma0))
    return EnsembleState(grid, waves, clouds, kernel, t=0.0)
