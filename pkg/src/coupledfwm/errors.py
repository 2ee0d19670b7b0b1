"""Exception types shared across the package."""


class DomainError(ValueError):
    """A query fell outside the validity domain of a model (wavelength, guidance, geometry)."""


class NumericalError(ArithmeticError):
    """A numerical procedure diverged or produced non-finite values."""


class ConfigError(ValueError):
    """A run configuration failed schema validation."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
