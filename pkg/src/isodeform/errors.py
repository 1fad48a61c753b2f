"""Exception types shared across the package."""


class IsodeformError(Exception):
    """Base class for package-specific failures."""


class NotIsospectralError(IsodeformError):
    """Two skew matrices compared at a point do not share a spectrum.

    Carries the best-effort conjugator and the canonical-form mismatch so
    callers that only need a residual can still report one.
    """

    def __init__(self, message, mismatch=None, best_conjugator=None):
        super().__init__(message)
        self.mismatch = mismatch
        self.best_conjugator = best_conjugator


class InterpolationError(IsodeformError):
    """Polynomial interpolation system was unusable; carries cond number."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class StepFailureError(IsodeformError):
    """Continuation corrector failed to converge for the attempted step."""


class NoDeformationError(IsodeformError):
    """No kernel direction transverse to the symmetry orbit exists."""


class DegeneratePlaneError(IsodeformError):
    """Sectional curvature requested for a (numerically) dependent pair."""


class DegenerateOrbitError(IsodeformError):
    """Group orbit through the given point has lower dimension than asked."""


class ChartDomainError(IsodeformError):
    """Point lies outside a chart domain (margin included)."""


class InvariantViolationError(IsodeformError):
    """A quantity that must be symmetry-invariant failed its spot check."""


class UpstreamArtifactError(IsodeformError):
    """Missing, unreadable, or tampered artifact from an earlier stage."""
