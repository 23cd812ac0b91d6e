"""Exception types shared across the package."""


class DpiiError(Exception):
    """Base class for all package errors."""


class NumericalFailure(DpiiError):
    """Base for failures that map to CLI exit code 2."""


class DomainError(DpiiError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class StepFailure(NumericalFailure):
    """The adaptive integrator could not meet the requested tolerance.

    Attributes
    ----------
    x_last : float
        Last accepted abscissa.
    """

    def __init__(self, message, x_last=float("nan")):
        super().__init__(message)
        self.x_last = x_last


class NoPole(NumericalFailure):
    """Integration reached its stopping point without a blow-up."""

    def __init__(self, message, x_stop=float("nan")):
        super().__init__(message)
        self.x_stop = x_stop


class BracketFailure(NumericalFailure):
    """An initial bisection bracket does not straddle the target."""


class NoConvergence(NumericalFailure):
    """An iteration hit its cap; carries the best iterate and its residual."""

    def __init__(self, message, best=None, residual=float("nan")):
        super().__init__(message)
        self.best = best
        self.residual = residual


class SingularPivot(NumericalFailure):
    """A pivot of a tridiagonal elimination fell below the guard."""

    def __init__(self, message, row=-1):
        super().__init__(message)
        self.row = row


class NotDominant(DpiiError):
    """A matrix row fails strict diagonal dominance."""

    def __init__(self, message, row=-1, margin=float("nan")):
        super().__init__(message)
        self.row = row
        self.margin = margin


class BallEscapes(DpiiError):
    """The Lipschitz ball leaves the positive orthant."""


class GridCoverage(DpiiError, ValueError):
    """A sampled trajectory does not span the requested range."""


class IndexRange(DpiiError, IndexError):
    """Indices fall outside the allowed window."""


class BoundaryPoint(DpiiError, ValueError):
    """A point lies (numerically) on a region boundary curve."""


class Degenerate(DpiiError, ValueError):
    """Input data cannot determine the requested fit."""


class ParseError(DpiiError, ValueError):
    """A configuration file or flag set is malformed.

    Attributes
    ----------
    key : str or None
        Offending key, when one can be named.
    """

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line
