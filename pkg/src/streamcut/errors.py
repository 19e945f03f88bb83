"""Exception types shared across the package."""


class StreamcutError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(StreamcutError):
    """Malformed or inconsistent input data (files, labels, parameters)."""


class CapacityError(StreamcutError):
    """A partition capacity constraint cannot be satisfied."""
