"""Exception hierarchy shared by every module of the package."""


class VCSError(Exception):
    """Base class for all errors raised by matvcs."""


class DimensionError(VCSError, ValueError):
    pass


class DomainError(VCSError, ValueError):
    pass


class PoleError(VCSError, ValueError):
    pass


class TruncationError(VCSError, ArithmeticError):
    """Series did not reach tolerance within the allowed number of terms.

    ``residual`` carries the last tail estimate.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConvergenceError(VCSError, ArithmeticError):
    """A normalization series diverges or does not settle under the level cap."""

    def __init__(self, message, partial_sums=None):
        super().__init__(message)
        self.partial_sums = partial_sums


class PreconditionError(VCSError, ValueError):
    pass


class AlgebraError(VCSError, ArithmeticError):
    pass


class ParameterError(VCSError, ValueError):
    pass


class AccuracyError(VCSError, ArithmeticError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularityError(VCSError, ArithmeticError):
    pass


class ConfigError(VCSError, ValueError):
    pass
