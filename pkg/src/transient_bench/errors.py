"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A physical parameter violates its domain (non-positive R, L, C, ...)."""

    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


class ConfigError(ValueError):
    """Scenario configuration problem; ``path`` is the dotted key path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


class TimestepError(ValueError):
    """The requested timestep is incompatible with the circuit."""

    def __init__(self, message: str, max_dt: float):
        super().__init__(message)
        self.max_dt = max_dt


class NumericFault(RuntimeError):
    """The time march produced a non-finite value or a singular system."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class SingularMatrixError(NumericFault):
    pass
