"""Exception hierarchy shared by all modules."""


class CmcError(Exception):
    """Base class for all library errors."""


class DomainError(CmcError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class RangeError(CmcError, ValueError):
    """The requested value diverges or is undefined (e.g. K' at q = 0)."""


class BranchError(CmcError, ValueError):
    """Evaluation at a branch cut, or a branch could not be continued."""


class NumericsError(CmcError, ArithmeticError):
    """A numerical routine failed to converge.

    ``best_estimate`` carries the last iterate so callers can decide
    whether to accept a degraded result.
    """

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


class ClosingError(CmcError, ValueError):
    """Spectral data does not satisfy the closing conditions to tolerance."""


class MeshError(CmcError, ValueError):
    """Mesh construction or contour extraction failed validation."""


class MoveError(CmcError, ValueError):
    """A triple move was applied where its precondition fails."""
