"""Exception types shared across the package.

Validation failures (bad inputs, malformed configs) derive from
``ValidationError``; failures of the numerics themselves (divergence,
oracle disagreement) derive from ``NumericalError``.  The CLI maps the
former to exit code 2 and the latter to exit code 3.
"""


class MinfrontError(Exception):
    """Base class for all package errors."""


class ValidationError(MinfrontError):
    """Input or configuration rejected before any computation ran."""


class NumericalError(MinfrontError):
    """A computation ran and failed to meet its contract."""


class DegenerateProfile(ValidationError):
    """Profile with equal asymptotes cannot be normalized to a probability."""


class WindowTooSmall(ValidationError):
    """Requested values fall outside the grid window beyond tolerance."""


class BoundaryNotAttained(ValidationError):
    """Profile edge values deviate too far from the declared asymptotes."""

class KernelNotDecreasing(ValidationError):
    """Operation requires a kernel non-increasing on the positive axis."""


class CoarseKernelTable(ValidationError):
    """Tabulated kernel samples are too coarse for the target grid."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain (e.g. negative density)."""


class UnnormalizedPotential(ValidationError):
    """Well potential does not vanish at the declared phase values."""


class SubcriticalBeta(ValidationError):
    """Two-phase front requested below the critical inverse temperature."""


class ConfigError(ValidationError):
    """Run configuration file failed validation."""


class QuadratureFailure(NumericalError):
    """An adaptive quadrature did not converge to the requested tolerance."""


class OracleMismatch(NumericalError):
    """Fast path and brute-force oracle disagree beyond tolerance."""


class TailNotClosed(NumericalError):
    """Excess-energy integrand does not vanish at the window edges."""


class MaxIterExceeded(NumericalError):
    """Fixed-point iteration hit its sweep budget.

    Carries the best iterate found so far in ``best`` for diagnostics.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DivergedOutOfWindow(NumericalError):
    """Iterates left the admissible window."""


class NotConverged(NumericalError):
    """Operation requires a converged front solution."""


class CertificationFailure(NumericalError):
    """Minimality certification found offending competitors.

    ``offenders`` lists (index, energy gap) pairs for the failures.
    """

    def __init__(self, message, offenders=()):
        super().__init__(message)
        self.offenders = list(offenders)


class InsufficientTail(NumericalError):
    """Too few usable points in the tail region for a decay fit."""


class NoTransitionWarning(UserWarning):
    """No symmetric/asymmetric transition found in the scanned range."""
