"""Exception hierarchy.

The three branches map onto the command-line exit codes: configuration
problems (1), violated mathematical preconditions (2) and numerical
failures (3).
"""


class TailTreeError(Exception):
    """Base class for all errors raised by :mod:`tailtrees`."""

    exit_code = 1


class ConfigError(TailTreeError, ValueError):
    """Malformed model, query or tree description."""

    exit_code = 1


class TreeStructureError(ConfigError):
    """The edge list does not describe a tree."""


class PreconditionError(TailTreeError, ValueError):
    """A mathematical precondition of an operation does not hold.

    ``condition`` names the violated condition, e.g. ``"zero-mass
    precondition"``.
    """

    exit_code = 2

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class MomentInconsistencyError(PreconditionError):
    """E[M^alpha] exceeds c_b / c_a, so the reversed increment is undefined."""

    def __init__(self, message):
        super().__init__(message, condition="moment consistency E[M^alpha] <= c_b/c_a")


class ZeroMassError(PreconditionError):
    """nu({x_i = 0}) > 0 for the conditioning index of a source."""

    def __init__(self, message, offending=()):
        super().__init__(message, condition="zero-mass precondition")
        self.offending = tuple(offending)


class NumericalError(TailTreeError, ArithmeticError):
    """Quadrature divergence, bisection failure and similar."""

    exit_code = 3
