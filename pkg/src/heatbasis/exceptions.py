"""Exception hierarchy shared by every module of the package."""


class HeatBasisError(Exception):
    """Base class for all errors raised by heatbasis."""


class DomainError(HeatBasisError, ValueError):
    """An argument lies outside the domain of the operation."""


class OutOfRangeError(HeatBasisError, ArithmeticError):
    """Requested evaluation would overflow or lose all accuracy."""


class ConvergenceError(HeatBasisError, ArithmeticError):
    """An iterative routine exhausted its iteration budget."""


class NotPSDError(HeatBasisError, ValueError):
    """A matrix expected to be positive semidefinite has a negative pivot."""


class TruncationRequiredError(HeatBasisError, ArithmeticError):
    """Division by an eigenvalue too small to be trusted."""


class UnsupportedPointError(HeatBasisError, ValueError):
    """Evaluation point where the formula is not supported (boundary, singularity)."""


class InvalidConfigError(HeatBasisError, ValueError):
    """Experiment configuration failed validation."""
