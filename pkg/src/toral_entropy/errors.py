"""Exception hierarchy shared by all modules."""


class ToralError(Exception):
    """Base class for every error raised by this package."""


class NotAutomorphism(ToralError, ValueError):
    """The integer matrix is not in GL(l, Z)."""


class DegreeTooLarge(ToralError):
    """The exact factor search would exceed the configured degree cap."""


class NoConvergence(ToralError):
    """Root iteration failed to certify residuals."""


class AmbiguousGrouping(ToralError):
    """Two modulus classes can be neither merged nor separated with confidence."""


class IllConditioned(ToralError):
    """The conjugating matrix exceeds the conditioning cap."""


class PreconditionViolated(ToralError, ValueError):
    pass


class DegenerateProjection(ToralError):
    """No coordinate projection charts the unstable subspace."""


class HypothesisViolated(ToralError, ValueError):
    """A radius does not exceed the block diameter."""


class BudgetExceeded(ToralError):
    """An enumeration would exceed its memory/time budget."""


class TargetsOutOfRange(ToralError, ValueError):
    pass


class SearchExhausted(ToralError):
    """The parameter search ran out of rounds; ``diagnosis`` says why."""

    def __init__(self, message, diagnosis=None):
        super().__init__(message)
        self.diagnosis = diagnosis or {}
