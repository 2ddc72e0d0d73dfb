"""Time-dependent quantum Monte Carlo for a 1D soft-core two-electron atom.

Concurrent walker/guide-wave ensembles with a Gaussian-windowed effective
electron-electron potential, plus a numerically exact two-body solver used
as the verification oracle.
"""

__version__ = "0.1.0"

from .grids import Density1D, Grid1D, WaveFn1D, WaveFn2D  # noqa: F401
from .potentials import LaserPulse, SoftCoreParams  # noqa: F401
