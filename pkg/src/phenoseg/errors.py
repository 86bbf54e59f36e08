"""Exception hierarchy shared across the package."""


class PhenosegError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PhenosegError):
    """Invalid configuration value or unsupported option."""


class DimensionError(PhenosegError):
    """Shape mismatch between arrays that must be compatible."""


class DataFormatError(PhenosegError):
    """Malformed or truncated file content."""


class EvaluationError(PhenosegError):
    """A numeric evaluation produced a non-finite or unusable result."""


class DivergenceError(PhenosegError):
    """Training diverged (non-finite loss for a full epoch)."""
