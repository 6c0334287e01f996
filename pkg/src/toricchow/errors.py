"""Exception types shared across the package."""


class ToricError(Exception):
    """Base class; ``witness`` carries the offending object when there is one."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class InvalidCone(ToricError):
    pass


class InvalidFan(ToricError):
    pass


class NotPure(ToricError):
    pass


class NotSmooth(ToricError):
    pass


class NotAFace(ToricError):
    pass


class InvalidSelection(ToricError):
    pass


class HypothesisViolation(ToricError):
    pass


class OrderingViolation(ToricError):
    pass


class MembershipViolation(ToricError):
    pass


class PreconditionFailed(ToricError):
    pass


class NotAChainMap(ToricError):
    pass


class SizeLimit(ToricError):
    pass


class NotABasis(ToricError):
    pass


class RouteMismatch(ToricError):
    pass


class MethodDisagreement(ToricError):
    pass


class UnsupportedRay(ToricError):
    pass


class ConclusionFailed(ToricError):
    pass


class AdaptedBasisFailure(ToricError):
    pass


class CorruptCache(ToricError):
    pass
