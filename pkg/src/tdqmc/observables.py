"""Everything measured on either engine: ensemble density matrices,
coherence, survival probability, pair-separation densities, and
trajectory-bundle comparisons.

Both engines feed the same operations: the TDQMC engine builds its density
matrix as the simple mean of guide-wave outer products, the exact engine
supplies the reduced density matrix, and from there a single code path
produces every curve.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetricGrid,
    BoundOutsideGrid,
    EmptyEnsemble,
    GridMismatch,
    InconsistentEnsembles,
    LengthMismatch,
)
from .grids import Density1D, Grid1D, kde_estimate, l1_distance


@dataclass
class DensityMatrix:
    """Discretized one-electron rho(x, x') on a square grid."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        n = self.grid.n_points
        if self.values.shape != (n, n):
            raise ValueError("values shape does not match grid")

    def trace(self):
        return float(np.sum(np.real(np.diag(self.values)) * self.grid.trapz_weights()))

    def purity(self):
        w = self.grid.trapz_weights()
        return float(np.real(np.sum((np.abs(self.values) ** 2) * w[:, None] * w[None, :])))

    def hermiticity_defect(self):
        return float(np.max(np.abs(self.values - np.conj(self.values.T))))

    def diagonal_density(self) -> Density1D:
        return Density1D(self.grid, np.real(np.diag(self.values)).copy())


@dataclass
class ObservableSeries:
    """A labelled time series from one engine."""

    times: np.ndarray
    values: np.ndarray
    label: str
    engine: str  # "tdqmc" | "exact"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.times.shape != self.values.shape:
            raise LengthMismatch("times and values differ in length")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")


def density_matrix_from_wave_array(grid: Grid1D, waves: np.ndarray) -> DensityMatrix:
    """rho = (1/M) sum_k conj(phi_k)(x) phi_k(x') for waves stacked as (M, n)."""
    if waves.ndim != 2 or waves.shape[0] == 0:
        raise EmptyEnsemble("need at least one wave")
    m = waves.shape[0]
    rho = (np.conj(waves).T @ waves) / m
    return DensityMatrix(grid, rho)


def ensemble_density_matrix(waves) -> DensityMatrix:
    """Simple mean of outer products over a guide-wave ensemble."""
    if len(waves) == 0:
        raise EmptyEnsemble("need at least one wave")
    grid = waves[0].grid
    for w in waves[1:]:
        if (w.grid.x_min, w.grid.x_max, w.grid.n_points) != (
                grid.x_min, grid.x_max, grid.n_points):
            raise GridMismatch("ensemble waves on different grids")
    arr = np.stack([w.values for w in waves])
    return density_matrix_from_wave_array(grid, arr)


def coherence(rho: DensityMatrix, reference=None, mode="modulus_of_sum"):
    """Anti-diagonal coherence measure C = |sum_x rho(x, -x) dx|.

    ``reference`` (usually the t=0 value) rescales the result so a pure
    symmetric state reads 1. ``mode="sum_of_moduli"`` integrates |rho(x, -x)|
    instead, for sensitivity checks.
    """
    if not rho.grid.is_symmetric():
        raise AsymmetricGrid("coherence needs a grid symmetric about 0")
    anti = rho.values[np.arange(rho.grid.n_points),
                      np.arange(rho.grid.n_points)[::-1]]
    w = rho.grid.trapz_weights()
    if mode == "sum_of_moduli":
        c = float(np.sum(np.abs(anti) * w))
    else:
        c = float(np.abs(np.sum(anti * w)))
    if reference is not None:
        c /= reference
    return c


def _integrate_linear(x, f, lo, hi):
    """Integral of the piecewise-linear interpolant of f over [lo, hi]."""
    xs = np.concatenate([[lo], x[(x > lo) & (x < hi)], [hi]])
    fs = np.interp(xs, x, f)
    return float(np.trapezoid(fs, xs))


def survival_probability(rho: DensityMatrix, x_bound: float):
    """Probability mass of the diagonal density within |x| < x_bound."""
    g = rho.grid
    if not (g.x_min <= -x_bound and x_bound <= g.x_max):
        raise BoundOutsideGrid(f"|x| < {x_bound} not inside [{g.x_min}, {g.x_max}]")
    diag = np.real(np.diag(rho.values))
    return _integrate_linear(g.points, diag, -x_bound, x_bound)


def pair_density(cloud1, cloud2, bandwidth, u_grid: Grid1D) -> Density1D:
    """KDE over replica separations |x_1^k - x_2^k| on u_grid."""
    if cloud1.m != cloud2.m:
        raise InconsistentEnsembles("clouds differ in walker count")
    sep = np.abs(cloud1.positions - cloud2.positions)
    return kde_estimate(sep, bandwidth, u_grid)


def count_downward_steps(values, min_drop=0.01, slope_eps=1e-4):
    """Number of distinct downward steps in a (survival-like) series.

    A step is a maximal falling run whose total drop exceeds ``min_drop``;
    sample-to-sample changes within ``slope_eps`` count as plateau.
    """
    v = np.asarray(values, dtype=np.float64)
    d = np.diff(v)
    steps = 0
    drop = 0.0
    falling = False
    for dv in d:
        if dv < -slope_eps:
            drop += -dv
            falling = True
        else:
            if falling and drop >= min_drop:
                steps += 1
            drop = 0.0
            falling = False
    if falling and drop >= min_drop:
        steps += 1
    return steps


def trajectory_bundle_compare(tdqmc_trajs, exact_trajs, grid: Grid1D,
                              bandwidth):
    """Pointwise deviations between paired trajectory bundles plus the L1
    distance of their final KDE densities.

    Bundles are (n_times, n_trajs) arrays sharing time stamps and initial
    walkers. Returns a dict with the across-bundle RMS deviation series, the
    per-trajectory RMS over time, their mean, and the final-density L1.
    """
    td = np.asarray(tdqmc_trajs, dtype=np.float64)
    ex = np.asarray(exact_trajs, dtype=np.float64)
    if td.shape != ex.shape:
        raise LengthMismatch(f"bundle shapes differ: {td.shape} vs {ex.shape}")
    dev = td - ex
    rms_series = np.sqrt(np.mean(dev**2, axis=1))
    per_traj_rms = np.sqrt(np.mean(dev**2, axis=0))
    kde_td = kde_estimate(td[-1], bandwidth, grid)
    kde_ex = kde_estimate(ex[-1], bandwidth, grid)
    return {
        "rms_series": rms_series,
        "per_traj_rms": per_traj_rms,
        "mean_rms": float(np.mean(per_traj_rms)),
        "final_l1": l1_distance(kde_td, kde_ex),
    }
