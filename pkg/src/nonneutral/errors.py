"""Exception hierarchy shared by the solvers and the harness."""


class NonNeutralError(Exception):
    """Base class for every error raised by this package."""


class InvalidMarket(NonNeutralError, ValueError):
    """Market parameters violate a positivity or concavity requirement."""


class InfeasibleMarket(NonNeutralError, ValueError):
    """Parameters are valid but admit no positive-demand solution for the request."""


class NoBracket(NonNeutralError):
    """A root was requested on an interval whose endpoints share a sign."""


class NoConvergence(NonNeutralError):
    """An iterative method hit its iteration cap."""


class MonotonicityViolation(NonNeutralError):
    """A function promised to be monotone was not, on the sampled points."""


class NoFiniteCrossing(NonNeutralError):
    """The attention-demand curve has no finite crossing (normal valuations, zero demand)."""


class RegimeMismatch(NonNeutralError):
    """An operation that needs an interior equilibrium received a boundary one."""


class NonpositiveUtility(NonNeutralError, ValueError):
    """Nash bargaining is undefined because a utility is not strictly positive."""


class NoInteriorSolution(NonNeutralError):
    """The interior first-order system has no admissible solution.

    ``fixed_points`` carries whatever roots were found so callers can inspect them.
    """

    def __init__(self, message, fixed_points=()):
        super().__init__(message)
        self.fixed_points = tuple(fixed_points)
