"""Exception and warning types shared across the package."""


class ChiralsimError(Exception):
    """Base class for all package errors."""


class DomainError(ChiralsimError, ValueError):
    """An argument lies outside the physical domain of an operation."""


class SingularityError(ChiralsimError, ArithmeticError):
    """A linear system or closed-form denominator is exactly singular."""


class UndefinedChiralityError(DomainError):
    """Optical chirality requested for a field with no in-plane component."""


class UndefinedMetricError(ChiralsimError, ArithmeticError):
    """A ratio metric has a vanishing denominator (e.g. contrast with T+ + T- = 0)."""


class FormatError(ChiralsimError, ValueError):
    """A field-map or config file is malformed."""


class ConfigError(ChiralsimError, ValueError):
    """Invalid or inconsistent run configuration."""


class NumericalError(ChiralsimError, ArithmeticError):
    """Non-finite values appeared during time integration."""


class IncompleteRunWarning(UserWarning):
    """Residual excitation was still inside the system when integration stopped."""
