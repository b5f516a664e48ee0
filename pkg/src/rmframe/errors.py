"""Exception hierarchy.

Every error raised on purpose by the library derives from ``RMFrameError`` so
callers (and the CLI) can separate domain failures from programming bugs.
"""


class RMFrameError(Exception):
    pass


class InputError(RMFrameError, ValueError):
    """Malformed or inconsistent input (CLI exit code 2)."""


class NumericError(RMFrameError, ArithmeticError):
    """A computation could not produce a trustworthy result (CLI exit code 3)."""


class OutOfRange(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class GridMismatch(InputError):
    pass


class NotInHalfSpace(InputError):
    pass


class TooFewSamples(InputError):
    pass


class DegenerateCurve(NumericError):
    pass


class NonFiniteState(NumericError):
    pass


class DependentInput(NumericError):
    pass


class FrenetUndefined(NumericError):
    pass


class CuspOnWindow(NumericError):
    pass


class CoincidentCurves(NumericError):
    pass


class DegenerateDevelopment(NumericError):
    pass


class DegenerateFit(NumericError):
    pass


class DegenerateWarning(UserWarning):
    """Emitted when a result is produced but is geometrically degenerate."""
