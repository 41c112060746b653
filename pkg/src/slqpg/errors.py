"""Exception hierarchy shared across the package."""


class SlqError(Exception):
    """Base class for all package errors."""


class InvalidInput(SlqError):
    """Non-finite entries, bad shapes, or violated preconditions."""


class SingularOperator(SlqError):
    """The vectorized Lyapunov operator is numerically singular.

    For a closed loop this signals that the gain is not mean-square
    stabilizing (or sits on the stability boundary).
    """


class NotStabilizing(SlqError):
    """A gain required to be mean-square stabilizing is not."""


class UnsupportedModel(SlqError):
    """Model outside the domain of a formula (e.g. ||B|| = 0)."""


class MaxIterExceeded(SlqError):
    """An iterative solver hit its iteration cap before converging."""


class StepCollapse(SlqError):
    """Backtracking shrank the stepsize below the floor without progress."""


class Overflow(SlqError):
    """A simulated path exceeded the magnitude guard (instability)."""


class ParseError(SlqError):
    """Malformed problem document (syntax level)."""


class ValidationError(SlqError):
    """Well-formed document with semantically invalid contents."""
