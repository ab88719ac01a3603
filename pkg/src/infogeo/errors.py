"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter or evaluation point lies outside the valid domain
    (non-positive scale parameter, finite-difference step crossing the
    domain boundary, non-SPD metric, ...)."""


class NumericalAbort(RuntimeError):
    """An integration or quadrature had to stop before reaching its target
    (scale coordinate hit the positivity floor, step size underflow,
    solution overflow).  Carries whatever partial result exists."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
