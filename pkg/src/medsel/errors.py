"""Exception hierarchy shared across the package."""


class MedselError(Exception):
    """Base class for all package errors."""


class DomainError(MedselError):
    """Invalid hyperparameters or inputs outside an operation's domain."""


class DimensionError(MedselError):
    """Mismatched vector/matrix dimensions."""


class CapacityError(MedselError):
    """Exhaustive enumeration refused (model space too large)."""


class DataError(MedselError):
    """Malformed input data (CSV parsing, non-numeric cells, ...)."""


class NumericError(MedselError):
    """Singular or numerically unusable matrix."""


class CollinearityError(NumericError):
    """A column lies (numerically) in the span of the conditioning block."""


class ConvergenceError(NumericError):
    """An iterative solver failed to converge; carries a residual report."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class DegenerateDataError(NumericError):
    """All model marginals vanished; the posterior is undefined."""


class DegenerateGeometryError(DomainError):
    """A geometric construction has a vanishing denominator."""


class BoundaryTieError(MedselError):
    """A strict-inequality decision landed on a boundary; lists contenders."""

    def __init__(self, message: str, contenders=()):
        super().__init__(message)
        self.contenders = tuple(contenders)
