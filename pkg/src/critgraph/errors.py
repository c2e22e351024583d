"""Exception hierarchy shared by all modules."""


class CritGraphError(Exception):
    """Base class for every error raised by this package."""


class LawError(CritGraphError, ValueError):
    """A degree distribution fails one of its invariants.

    ``invariant`` names the failing check and ``residual`` carries the
    offending value, so callers can report both.
    """

    def __init__(self, message, invariant=None, residual=None):
        super().__init__(message)
        self.invariant = invariant
        self.residual = residual


class NotNormalized(LawError):
    pass


class NotCritical(LawError):
    pass


class DegenerateTwoRegular(LawError):
    pass


class GammaOutOfRange(LawError):
    pass


class Infeasible(LawError):
    pass


class PsiDomain(CritGraphError, ValueError):
    pass


class EvenSumTimeout(CritGraphError, RuntimeError):
    pass


class OddDegreeSum(CritGraphError, ValueError):
    pass


class MalformedWalk(CritGraphError, ValueError):
    pass


class IndexOutOfRange(CritGraphError, IndexError):
    pass


class SimplicityTimeout(CritGraphError, RuntimeError):
    def __init__(self, message, attempts=None):
        super().__init__(message)
        self.attempts = attempts


class HorizonExceedsN(CritGraphError, ValueError):
    pass


class QuadratureFailure(CritGraphError, RuntimeError):
    pass


class EpsTooSmall(CritGraphError, ValueError):
    pass


class NotSorted(CritGraphError, ValueError):
    pass


class EmptySample(CritGraphError, ValueError):
    pass


class ReplicateFailure(CritGraphError, RuntimeError):
    """An ensemble replicate raised; carries the replicate's derived seed."""

    def __init__(self, message, seed=None, index=None):
        super().__init__(message)
        self.seed = seed
        self.index = index
