"""Exception types shared across the package."""


class DegenerateDataError(RuntimeError):
    """Input data carries no usable signal (zero matrix, no retainable modes)."""
