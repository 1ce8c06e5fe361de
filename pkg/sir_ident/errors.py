"""Exceptions raised by the sir_ident package.

Every domain error derives from :class:`SirIdentError` so callers (the CLI,
the experiment harness) can catch the whole family in one place.
"""


class SirIdentError(Exception):
    """Base class for all sir_ident errors."""


class ConfigError(SirIdentError):
    """A parameter or configuration file could not be used."""


class InvalidParameters(SirIdentError, ValueError):
    """Model parameters outside their admissible domain."""


class InfeasibleInitialState(SirIdentError):
    """Initial conditions would leave a negative number of susceptibles."""


class NotExtinct(SirIdentError):
    """An event log still has infectious individuals at its end."""


class StepTooLarge(SirIdentError):
    """A fixed-step integration drove a compartment below zero."""


class OutOfRange(SirIdentError):
    """An equivalent parameter set falls outside the parameter domain."""


class NoEpidemic(SirIdentError):
    """Growth and final-size data describe a subcritical epidemic."""


class InsufficientData(SirIdentError):
    """Too few reported infections to fit a growth rate."""


class Subcritical(SirIdentError):
    """The observed growth rate is not positive."""


class DomainViolation(SirIdentError):
    """Inverting the growth and final-size equations left the parameter domain."""


class EmptyDenominator(SirIdentError):
    """A survey sample contained no infectious individuals."""


class LogDomainError(SirIdentError):
    """A log-likelihood term has a non-positive argument."""


class DegenerateIntegral(SirIdentError):
    """The survival integral of the approximate likelihood is not positive."""


class SubcriticalWarning(UserWarning):
    """Final-size equation evaluated at or below the epidemic threshold."""
