"""Exception types shared across the package.

The CLI maps each type to a distinct process exit code, so library code
should raise the most specific one that applies.
"""


class GbsslError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(GbsslError, ValueError):
    """Invalid parameter or option combination (bad k, sigma, counts, ...)."""

    exit_code = 1


class DataError(GbsslError, ValueError):
    """Missing, malformed, or inconsistent input data."""

    exit_code = 2


class NumericalError(GbsslError, RuntimeError):
    """A numerical procedure failed (singular system, underflow, ...)."""

    exit_code = 3
