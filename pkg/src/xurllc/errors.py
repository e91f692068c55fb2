"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class ConvergenceError(RuntimeError):
    """An iterative procedure did not reach its tolerance."""

    def __init__(self, message, residual=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.trace = trace


class NumericError(ArithmeticError):
    """Overflow, a missing bracket, or a quadrature that would not settle."""


class ConfigError(ValueError):
    """A scenario config names an unknown key or violates a constraint."""
