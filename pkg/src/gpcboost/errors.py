"""Exception hierarchy shared by every module of the package."""


class GpcBoostError(Exception):
    """Base class for all errors raised by gpcboost."""


class ZeroPolynomial(GpcBoostError, ValueError):
    pass


class ConvergenceFailure(GpcBoostError, RuntimeError):
    pass


class DegenerateDenominator(GpcBoostError, ValueError):
    pass


class UnsupportedPoleStructure(GpcBoostError, ValueError):
    pass


class NotBoostable(GpcBoostError, ValueError):
    """Requested output voltage is not above the input voltage."""


class NotMonic(GpcBoostError, ValueError):
    pass


class DimensionMismatch(GpcBoostError, ValueError):
    pass


class SingularNormalMatrix(GpcBoostError, ArithmeticError):
    pass


class NoStableHorizon(GpcBoostError):
    """No prediction horizon up to the search limit stabilizes the loop."""


class CornerDominanceViolated(GpcBoostError):
    """The worst-case corner horizon leaves another corner unstable."""

    def __init__(self, message, horizon=None, failing=()):
        super().__init__(message)
        self.horizon = horizon
        self.failing = list(failing)


class NumericalBlowup(GpcBoostError, FloatingPointError):
    """Simulation state left the physically meaningful range.

    The partial trace up to the blowup is kept on ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
