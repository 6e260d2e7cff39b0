"""Exception types shared across the package."""


class ConfigError(Exception):
    """Invalid, inconsistent, or unknown run-configuration content."""


class DataFormatError(Exception):
    """Dataset / checkpoint / CSV files that do not match the documented schema."""


class NumericalError(Exception):
    """A numerical invariant was violated (NaN loss, non-Hermitian operator, ...)."""
