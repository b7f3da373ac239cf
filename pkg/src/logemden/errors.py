"""Exception types shared across the package.

Every error raised by the library derives from :class:`LogEmdenError`, so
callers (and the service layer) can map library failures to a single
handler.  Names follow the operation contracts: each exception corresponds
to one documented failure mode.
"""

from __future__ import annotations


class LogEmdenError(Exception):
    """Base class for all library errors."""


class OutOfRange(LogEmdenError):
    """Exponent triple outside the admissible region."""


class DomainError(LogEmdenError):
    """Argument outside the mathematical domain of an operation."""


class NonpositiveTime(DomainError):
    """Coefficient functions a(t), b(t) require t > 0."""


class NoMonotoneRoot(LogEmdenError):
    """Growth inversion target lies below the monotone branch."""


class RegimeExit(LogEmdenError):
    """State left the working regime u > e of the physical frame."""


class ZetaGuard(LogEmdenError):
    """zeta fell below the configured guard; zeta^beta is untrustworthy."""


class StepUnderflow(LogEmdenError):
    """Adaptive step shrank below 1e-14 of the integration span."""


class SampleBudgetExceeded(LogEmdenError):
    """Integration produced more samples than the configured budget."""


class TrajectoryTooShort(LogEmdenError):
    """Trajectory tail is shorter than the classification fit window."""


class NonpositiveSamples(LogEmdenError):
    """Log-slope fitting needs strictly positive sample values."""


class BracketInvalid(LogEmdenError):
    """Separatrix bracket endpoints do not straddle the two outcomes."""


class InsufficientSamples(LogEmdenError):
    """Residual or flux checks need more samples than the trajectory has."""
