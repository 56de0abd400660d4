class ConfigError(ValueError):
    """Invalid run configuration (CLI exit code 1)."""


class NumericalError(ArithmeticError):
    """A numerical self-consistency check failed (CLI exit code 2)."""
