"""Exception types shared across the package."""


class GapedgeError(Exception):
    """Base class for all package errors."""


class InvalidInputError(GapedgeError, ValueError):
    """Input violates a documented precondition or invariant."""


class BracketError(GapedgeError, ValueError):
    """Root bracket does not change sign."""


class SingularEvaluationError(GapedgeError, ValueError):
    """Evaluation requested exactly at a Coulomb singularity."""


class StiffnessError(GapedgeError):
    """Adaptive step size underflowed; carries the last reached abscissa."""

    def __init__(self, t_reached, message=None):
        self.t_reached = t_reached
        super().__init__(message or f"step size underflow at t={t_reached!r}")


class NumericalBreakdownError(GapedgeError):
    """Factorization pivot breakdown survived the retry policy; carries the shift."""

    def __init__(self, shift, message=None):
        self.shift = shift
        super().__init__(message or f"pivot breakdown at shift {shift!r}")


class TruncationError(GapedgeError):
    """Basis-size doubling failed to converge within the allowed refinements."""


class SeedAccuracyError(GapedgeError, ValueError):
    """Frobenius seed requested at a radius too large for its series error bound."""
