"""Exception hierarchy shared by all modules."""


class NlsbifError(Exception):
    """Base class for every error raised by this package."""


class DeltaNotEvaluable(NlsbifError):
    pass


class WrongKind(NlsbifError):
    pass


class IntegrationFailure(NlsbifError):
    def __init__(self, message, last_x=None):
        super().__init__(message)
        self.last_x = last_x


class BoundaryZero(NlsbifError):
    pass


class DepthExceeded(NlsbifError):
    def __init__(self, message, partial=()):
        super().__init__(message)
        self.partial = list(partial)


class NotOnAxis(NlsbifError):
    pass


class NewtonDiverged(NlsbifError):
    pass


class Degenerate(NlsbifError):
    pass


class BCOutOfRange(NlsbifError):
    """Raised when kappa^2 - eps*u^2/2 < 0 at a boundary (the square root would be complex)."""


class NotSymmetric(NlsbifError):
    pass


class NoThreshold(NlsbifError):
    pass


class LogDerivOutOfRange(NlsbifError):
    pass


class ZeroBoundaryValue(NlsbifError):
    pass


class AboveThreshold(NlsbifError):
    pass


class ConfigError(NlsbifError):
    pass
