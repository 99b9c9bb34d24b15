"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of the requested quantity."""


class ConvergenceError(RuntimeError):
    """A quadrature routine exhausted its evaluation budget before reaching tolerance.

    Carries the best available value and the achieved error estimate so callers
    can decide whether the partial result is still useful.
    """

    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
