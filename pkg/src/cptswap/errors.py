"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A physical parameter violates a hard constraint (sign, range)."""


class ConvergenceError(RuntimeError):
    """The steady-state iteration did not reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class IllConditionedError(RuntimeError):
    """A frequency-response solve is too close to an undamped pole."""


class PositivityError(RuntimeError):
    """A matrix that must be positive semidefinite is not (algebra bug)."""
