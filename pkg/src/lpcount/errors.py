"""Exception types shared across the package."""


class LpcountError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(LpcountError):
    """Model configuration and parameter shapes disagree."""


class DataError(LpcountError):
    """Input data is malformed or inconsistent."""


class NumericError(LpcountError):
    """A numerical routine failed (overflow, non-convergence)."""
