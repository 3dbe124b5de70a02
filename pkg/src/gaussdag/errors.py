"""Exception types shared across the package."""


class GaussDagError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(GaussDagError, ValueError):
    """Matrix or vector input has the wrong shape, dtype or structure."""


class CycleError(GaussDagError):
    """A graph (or the result of an edge operation) contains a directed cycle."""


class NotApplicableError(GaussDagError):
    """An edge operator's precondition does not hold on the given graph."""


class NoMoveError(GaussDagError):
    """No edge move exists (graphs on fewer than two nodes)."""


class TooLargeError(GaussDagError):
    """Problem size exceeds what an exhaustive routine supports."""


class NotSpdError(GaussDagError):
    """Matrix is not symmetric positive definite.

    ``pivot`` is the 0-based index of the first nonpositive Cholesky pivot
    when known, else None.
    """

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


class DomainError(GaussDagError, ValueError):
    """Scalar argument outside its mathematical domain."""


class HyperError(GaussDagError, ValueError):
    """Invalid prior hyperparameters (e.g. shape not exceeding q - 1)."""


class DegenerateError(GaussDagError, ValueError):
    """Edge-inclusion probability at 0 or 1 makes log-ratios degenerate."""


class ConfigError(GaussDagError, ValueError):
    """Sampler configuration inconsistent with the requested run."""


class QueryError(GaussDagError, ValueError):
    """Invalid causal query (bad targets/response combination)."""


class CollapsedChainError(GaussDagError):
    """Operation needs parameter draws but the chain was run collapsed."""


class EmptyChainError(GaussDagError):
    """Operation needs at least one retained posterior draw."""


class CorruptEncodingError(GaussDagError):
    """Compact chain payload failed to decode."""
