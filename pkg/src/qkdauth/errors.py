"""Exception types shared across the package."""


class QkdAuthError(Exception):
    """Base class for all errors raised by qkdauth."""


class DimensionError(QkdAuthError, ValueError):
    """Operand lengths or scheme dimensions are inconsistent."""


class KeyExhaustedError(QkdAuthError):
    """The key pool cannot supply the requested number of one-time bits."""


class PoolDesyncError(QkdAuthError):
    """Two pool replicas are no longer at the same consumption offset."""


class PoolFormatError(QkdAuthError):
    """A persisted key pool file is malformed."""
