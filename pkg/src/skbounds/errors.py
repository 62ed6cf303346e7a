"""Exception hierarchy shared by all skbounds modules."""


class SkBoundsError(Exception):
    """Base class for library errors."""


class ConfigurationError(SkBoundsError, ValueError):
    """A parameter or configuration value is outside its allowed range."""


class DomainError(SkBoundsError, ValueError):
    """A function was called outside its mathematical domain."""


class EvaluationError(SkBoundsError, ArithmeticError):
    """A computation produced a non-finite value.

    ``node`` holds the quadrature node (or other abscissa) where the
    integrand misbehaved, when known.
    """

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class ConvergenceError(SkBoundsError, RuntimeError):
    """An iterative method did not converge within its budget."""
