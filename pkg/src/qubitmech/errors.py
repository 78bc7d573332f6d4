"""Exception hierarchy.

``ConfigurationError`` subclasses describe bad input (CLI exit 2);
``SolverError`` subclasses describe numerical failures (CLI exit 3).
"""


class QubitMechError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(QubitMechError, ValueError):
    pass


class SolverError(QubitMechError, RuntimeError):
    pass


class NonPositiveEnergy(ConfigurationError):
    pass


class NonFinite(ConfigurationError):
    pass


class NonPositiveInput(ConfigurationError):
    pass


class DimensionTooSmall(ConfigurationError):
    pass


class DomainTooSmall(ConfigurationError):
    pass


class UnsupportedObservable(ConfigurationError):
    pass


class UnsupportedBasis(ConfigurationError):
    pass


class BasisMismatch(ConfigurationError):
    pass


class BadK(ConfigurationError):
    pass


class BadLevel(ConfigurationError):
    pass


class ConfigError(ConfigurationError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(ConfigError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NoConvergence(SolverError):
    pass


class RootFindingFailure(SolverError):
    pass


class SingleWell(SolverError):
    pass


class IoError(QubitMechError, OSError):
    pass
