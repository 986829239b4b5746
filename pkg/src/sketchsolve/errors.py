"""Exception types raised across the package."""


class SketchSolveError(Exception):
    """Base class for all errors raised by sketchsolve."""


class DimensionError(SketchSolveError):
    """Inconsistent or out-of-range matrix/vector dimensions."""


class RankDeficientError(SketchSolveError):
    """A matrix required to have full column rank does not."""


class NotPositiveDefiniteError(SketchSolveError):
    """A Cholesky factorization hit a non-positive pivot."""


class NoConvergenceError(SketchSolveError):
    """An iterative eigensolver exceeded its sweep budget."""


class NotPowerOfTwoError(SketchSolveError):
    """A length that must be a power of two is not."""


class TooLargeError(SketchSolveError):
    """Refusing to materialize an operator this large."""


class BadRatiosError(SketchSolveError):
    """Aspect ratios outside 0 < gamma < xi <= 1 (or a shape outside (0,1))."""


class InvalidZError(SketchSolveError):
    """Transform evaluated at a point of its forbidden set."""


class PoleInputError(SketchSolveError):
    """Evaluation point coincides with a pole of the transform."""


class EmptySamplesError(SketchSolveError):
    """An empirical statistic was requested for an empty sample."""


class InitRequiresXStarError(SketchSolveError):
    """The requested initialization needs the exact solution supplied."""
