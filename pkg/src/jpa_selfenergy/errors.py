"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class JPAError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(JPAError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class UnsupportedVariantError(JPAError, ValueError):
    """The requested operation has no meaning for this coupling network."""


class AccuracyError(JPAError, ArithmeticError):
    """A numerical routine could not reach the requested tolerance.

    The best estimate obtained so far is kept in ``estimate`` and the
    associated error bound in ``error``.
    """

    def __init__(self, message: str, estimate: complex, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SingularGainError(JPAError, ArithmeticError):
    """The response determinant vanishes, so the linear gain diverges."""

    def __init__(self, message: str, delta: float):
        super().__init__(message)
        self.delta = delta


class ThresholdNotFoundError(JPAError, RuntimeError):
    """No instability was found inside the pump-strength bracket.

    ``curve`` holds ``(epsilon, max_real_eigenvalue)`` samples so the caller
    can inspect how close the scan came to a crossing.
    """

    def __init__(self, message: str, curve):
        super().__init__(message)
        self.curve = curve


class BandwidthError(JPAError, RuntimeError):
    """The half-maximum crossings are not bracketed by the profile grid."""


class ConfigError(JPAError, ValueError):
    """A run configuration is malformed or violates a constraint."""
