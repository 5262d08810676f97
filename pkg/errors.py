"""
Exception hierarchy for the gamma-ratio lab.

Library code raises these; the CLI maps them to exit codes.
"""


class GammaLabError(Exception):
    """Base class for all errors raised by the library."""


class DomainError(GammaLabError, ValueError):
    """Argument or parameter outside the domain of a function."""


class ConvergenceError(GammaLabError, ArithmeticError):
    """An iterative evaluation (series, continued fraction) did not converge."""


class QuadratureError(ConvergenceError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: float = float('nan'),
                 error_estimate: float = float('inf')):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate

    def __str__(self):
        base = super().__str__()
        return f"{base} (estimate={self.estimate!r}, error estimate={self.error_estimate!r})"


class UndeclaredGrowthError(QuadratureError):
    """Integrand handed to the engine without a declared growth class."""

    def __init__(self, label: str):
        super().__init__(f"integrand {label!r} has no declared growth class")
        self.label = label


class MissingDerivativeError(GammaLabError):
    """A class check needs the analytic derivative of a function handle."""

    def __init__(self, label: str):
        super().__init__(f"function {label!r} carries no analytic derivative")
        self.label = label


class ConfigError(GammaLabError):
    """Invalid sweep configuration or command-line usage."""
