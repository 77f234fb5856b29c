"""Exception hierarchy shared by all modules."""


class QTMError(Exception):
    """Base class for toolkit errors."""


class InvalidInputError(QTMError, ValueError):
    """An argument violates a documented precondition."""


class DivergenceError(QTMError, ValueError):
    """A quantity is infinite, e.g. relative entropy with a support violation."""


class AmbiguityError(QTMError):
    """A fixed point or stationary state is not unique."""


class TruncationError(QTMError):
    """A level sum cannot be converged within the truncation cap."""


class UnsupportedError(QTMError):
    """The requested comparison does not apply to the given configuration."""


class ConvergenceError(QTMError):
    """An iterative or adaptive procedure hit its refinement cap."""


class DegeneracyError(QTMError):
    """Instantaneous spectrum became degenerate along a protocol."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time
