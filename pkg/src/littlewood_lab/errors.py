"""Exception hierarchy.

Configuration problems map to CLI exit code 2, numerical failures to exit code 3.
"""


class LabError(Exception):
    exit_code = 1


class ConfigError(LabError, ValueError):
    """Bad arguments, out-of-domain inputs, malformed files."""

    exit_code = 2


class NumericalError(LabError, ArithmeticError):
    """A computation ran but could not deliver a trustworthy answer."""

    exit_code = 3


class EmptyInputError(ConfigError):
    pass


class DomainError(ConfigError):
    pass


class SingularityError(DomainError):
    pass


class RegimeError(DomainError):
    """Direct Monte Carlo requested outside the range where it is affordable."""


class ExtrapolationError(DomainError):
    pass


class RangeError(DomainError):
    pass


class ResolutionError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass


class IllConditionedKernelError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class ToleranceError(NumericalError):
    pass


class UnreliableEstimateError(NumericalError):
    pass
