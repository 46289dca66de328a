"""Exception hierarchy shared by all modules."""


class FrobPadeError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(FrobPadeError, ValueError):
    """Invalid user input (measures, indices, configuration files)."""


class DomainError(FrobPadeError, ValueError):
    """A function was evaluated outside its domain (e.g. on a cut)."""


class NumericalError(FrobPadeError, ArithmeticError):
    """An iterative or algebraic procedure failed.

    ``residual`` carries the last achieved residual when it is meaningful,
    ``payload`` any extra diagnostic object (offending matrix block, last
    supports, ...).
    """

    def __init__(self, message, residual=None, payload=None):
        super().__init__(message)
        self.residual = residual
        self.payload = payload


class ConvergenceError(NumericalError):
    """An iteration did not reach its tolerance within the budget."""
