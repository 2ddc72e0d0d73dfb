"""Exception hierarchy shared by all tdqmc modules."""


class TDQMCError(Exception):
    """Base class for all package errors."""


class ZeroNorm(TDQMCError):
    """Field norm underflowed; signals a collapsed or failed state."""


class EmptySample(TDQMCError):
    """A sample-based estimator received no points."""


class NonPositiveBandwidth(TDQMCError):
    """KDE bandwidth must be > 0."""


class NonPositiveSigma(TDQMCError):
    """Kernel width must be > 0."""


class GridMismatch(TDQMCError):
    """Two fields live on different grids."""


class AsymmetricGrid(TDQMCError):
    """Operation needs a grid symmetric about x = 0."""


class BoundOutsideGrid(TDQMCError):
    """Integration bound lies outside the grid."""


class DegenerateCloud(TDQMCError):
    """All walkers coincide and no sigma floor is set."""


class InconsistentEnsembles(TDQMCError):
    """Walker clouds disagree in size or pairing."""


class EmptyEnsemble(TDQMCError):
    """No waves supplied for an ensemble average."""


class LengthMismatch(TDQMCError):
    """Paired series have different lengths or time stamps."""


class LinearSolveFailure(TDQMCError):
    """Tridiagonal / banded solve produced non-finite values."""


class NodeProximity(TDQMCError):
    """Wavefunction amplitude below the node floor at an evaluation point."""


class PopulationCollapse(TDQMCError):
    """Branching killed every walker-wave pair."""


class NoConvergence(TDQMCError):
    """Iteration exhausted its budget before meeting tolerance."""


class ValidationError(TDQMCError):
    """Run configuration violates an invariant."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class ParseError(TDQMCError):
    """Run configuration file failed to parse."""
