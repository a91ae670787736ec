"""Exception types shared across the package."""


class DataError(ValueError):
    """Invalid input data, file contents, or configuration."""


class CheckpointError(DataError):
    """Unreadable, corrupt, or incompatible model checkpoint."""


class DivergenceError(ArithmeticError):
    """Training produced a non-finite loss or parameter value."""
