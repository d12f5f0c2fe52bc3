"""Exception hierarchy shared by every module in the package."""


class FDerivError(Exception):
    """Base class for all errors raised by :mod:`fderiv`."""


class InvalidInterval(FDerivError, ValueError):
    """Raised when a parameter interval is degenerate or outside [0, 1]."""


class NonConvergent(FDerivError, ArithmeticError):
    """Raised when a dyadic refinement loop hits its depth limit.

    For total variation this usually means the path is not rectifiable
    (or the tolerance is unreachable in double precision).
    """

    def __init__(self, message, depth=None, last_increase=None):
        super().__init__(message)
        self.depth = depth
        self.last_increase = last_increase


class JoinMismatch(FDerivError, ValueError):
    """The end of the first path does not meet the start of the second."""


class ConstantPath(FDerivError, ValueError):
    """The path has (numerically) zero length, so it cannot be reparametrised."""


class InvalidPath(FDerivError, ValueError):
    """Malformed path data (repeated vertices, non-finite coordinates, ...)."""


class DivisionByZero(FDerivError, ZeroDivisionError):
    """A ``Div`` node hit a zero denominator during evaluation."""

    def __init__(self, node, point):
        super().__init__(f"division by zero in {node} at z={point!r}")
        self.node = node
        self.point = point


class NotHolomorphic(FDerivError, ValueError):
    """Symbolic differentiation met a conj/re/im node."""

    def __init__(self, node):
        super().__init__(f"expression is not holomorphic: offending node {node}")
        self.node = node


class ExprParseError(FDerivError, ValueError):
    """Raised by :func:`fderiv.expr.parse` on malformed prefix strings."""


class LengthMismatch(FDerivError, ValueError):
    pass


class OrderTooLow(FDerivError, ValueError):
    """A derivative sequence is shorter than the requested order."""


class PoleOnSet(FDerivError, ValueError):
    """The denominator gets too close to zero on the sampled set."""


class ScenarioError(FDerivError):
    """A scenario file could not be parsed or references unknown names."""
