"""Exception types raised across the package."""


class RuinSimError(Exception):
    """Base class for all package errors."""


class DomainError(RuinSimError, ValueError):
    """Argument outside the domain of a function."""


class ConvergenceError(RuinSimError, RuntimeError):
    """Numerical routine did not reach the requested tolerance."""


class ValidationError(RuinSimError, ValueError):
    """Invalid distribution or model parameters."""


class NetProfitError(ValidationError):
    """Traffic intensity violates the net profit condition rho < 1."""


class InsufficientSampleError(RuinSimError, ValueError):
    """Too few replications for the requested estimator."""


class ConfigError(RuinSimError, ValueError):
    """Malformed experiment configuration.

    ``key`` names the offending configuration entry when known.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
