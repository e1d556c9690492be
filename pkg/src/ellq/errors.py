"""Exception types shared across the workbench."""


class EllqError(Exception):
    """Base class for all workbench errors."""


class DomainError(EllqError):
    """Parameters outside the convergence domain of an evaluator."""


class TruncationError(EllqError):
    """A truncated sum/product hit max_terms before certifying its tail."""


class PoleError(EllqError):
    """Evaluation hit a pole.  ``indices`` carries the lattice location
    (m, n) when known, else a description of the offending factor."""

    def __init__(self, message, indices=None):
        super().__init__(message)
        self.indices = indices


class DegeneracyError(EllqError):
    """Colliding roots / degenerate parameters."""


class PairingError(EllqError):
    """A polynomial root could not be paired with its reciprocal."""


class ResonanceError(EllqError):
    """A resonant denominator 1 - p^i q^j v^2 vanished.  ``indices`` = (i, j)."""

    def __init__(self, message, indices):
        super().__init__(message)
        self.indices = indices


class ClassificationError(EllqError):
    """Exact polynomial division failed: invalid root partition."""


class SolutionInvalidError(EllqError):
    """A solved object failed a structural validity check."""


class ConvergenceError(EllqError):
    """An iterative solver did not converge.  ``residual`` holds the last value."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class RegimeError(DomainError):
    """Parameters outside the regime required by a thermodynamic formula."""
