"""Exception hierarchy."""


class DunklError(Exception):
    """Base class for all errors raised by dunklpw."""


class TruncationError(DunklError):
    """A series could not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message if achieved is None else f"{message} (achieved bound {achieved:.3e})")
        self.achieved = achieved


class KernelRangeError(DunklError, OverflowError):
    """The kernel value would overflow double precision."""


class QuadratureError(DunklError):
    """Quadrature failed to converge under panel refinement."""

    def __init__(self, message, defect=None):
        super().__init__(message if defect is None else f"{message} (defect {defect:.3e})")
        self.defect = defect


class IllConditionedError(DunklError):
    """A linear solve in coefficient space left a large residual."""

    def __init__(self, message, residual=None):
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")
        self.residual = residual


class InstabilityError(DunklError):
    """Iterated operator application exceeded its trim-loss budget."""

    def __init__(self, message, partial=None, losses=()):
        super().__init__(message)
        self.partial = partial
        self.losses = tuple(losses)


class ConfigError(DunklError, ValueError):
    """Invalid experiment configuration."""
