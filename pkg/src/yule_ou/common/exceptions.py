class YuleError(Exception):
    """Base class for every failure raised by yule_ou."""


class InvalidParameterError(YuleError, ValueError):
    pass


class UnstableSchemeError(InvalidParameterError):
    """Euler step with theta * delta >= 2; the recursion explodes."""


class DegenerateVarianceError(YuleError):
    """A centered path has (numerically) zero empirical variance."""


class NumericalOvershootError(YuleError):
    """A correlation left [-1, 1] by more than round-off."""


class BelowThresholdError(YuleError):
    """A rate bound was requested outside its range of validity."""


class DomainError(YuleError, ValueError):
    pass


class BetaTooSmallError(DomainError):
    pass


class EigenFailureError(YuleError):
    pass


class EmptySampleError(YuleError):
    pass


class ZeroBinsError(YuleError, ValueError):
    pass


class NonuniformGridError(YuleError):
    pass


class SkipLimitExceededError(YuleError):
    """Too many replications were skipped for degenerate variance."""
