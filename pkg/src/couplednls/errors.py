"""Exception types shared across the package.

The CLI maps these onto its exit-code contract, so solver failures stay
distinguishable from config errors all the way out.
"""


class BlowUpError(RuntimeError):
    """Time stepping detected unbounded field growth."""

    def __init__(self, message, t=None, last_state=None):
        super().__init__(message)
        self.t = t
        self.last_state = last_state


class TruncationError(RuntimeError):
    """Fields are not decayed at the grid edges beyond tolerance."""


class SpectralSingularityError(RuntimeError):
    """s11 vanishes (or nearly vanishes) on the real spectral line."""


class NonSimpleSpectrumError(RuntimeError):
    """A zero of s11 failed the simplicity check s11'(z_k) != 0."""


class SpectrumSearchError(RuntimeError):
    """Winding count and refined root count disagree."""


class NotAnEigenvalueError(ValueError):
    """Jost-column proportionality residual too large at the requested point."""


class DegeneratePartitionError(ValueError):
    """A discrete eigenvalue sits exactly on the vertical line Re z = z0."""


class QuadratureToleranceError(RuntimeError):
    """An adaptive quadrature failed to reach the requested tolerance."""
