"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class OPOError(Exception):
    """Base class for all package errors."""


class DomainError(OPOError, ValueError):
    """Input outside the domain where the model is defined."""


class ConfigError(OPOError, ValueError):
    """Malformed or inconsistent run configuration."""


class ConvergenceError(OPOError, RuntimeError):
    """A numerical routine failed to reach its tolerance.

    Parameters
    ----------
    message : str
        Human readable description.
    diagnostics : dict, optional
        Whatever the failing routine knew at the time (last iterate,
        residual, bracket, sample count...).
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class BracketError(ConvergenceError):
    """The supplied interval does not bracket a sign change."""


class SelfOscillationError(ConvergenceError):
    """Cavity round-trip operator is singular (the fluctuation mode is marginal)."""


class NonSymplecticError(OPOError, ArithmeticError):
    """A propagator or transfer matrix violates the canonical commutators."""


class UnphysicalCovarianceError(DomainError, ArithmeticError):
    """Covariance matrix violates the uncertainty principle."""
