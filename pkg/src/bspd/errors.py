"""Exception types shared across the package."""


class BspdError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(BspdError, ValueError):
    """An argument or configuration value violates a documented precondition."""


class DimensionMismatchError(BspdError, ValueError):
    """Array shapes passed to an operation are inconsistent with each other."""


class UnderdeterminedSupportError(BspdError, ValueError):
    """The requested support size exceeds the number of pilot observations."""


class ConfigError(BspdError, ValueError):
    """A configuration file failed to parse or contained an invalid entry."""
