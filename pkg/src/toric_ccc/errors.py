"""Exception hierarchy shared by all modules."""


class ToricError(ValueError):
    """Base class for every error raised by this package."""


# fans
class FanError(ToricError):
    pass


class NonPrimitiveRay(FanError):
    pass


class NotStronglyConvex(FanError):
    pass


class ConesNotIntersectingInFaces(FanError):
    pass


class DimensionMismatch(FanError):
    pass


class UnknownCone(FanError):
    pass


class InvalidCone(FanError):
    """A listed generator is not an extremal ray of its cone, or indices are bad."""


# divisors
class NotCartier(ToricError):
    pass


class OutsideSupport(ToricError):
    pass


class NotACompletion(ToricError):
    pass


class NotCartierAfterExtension(NotCartier):
    pass


# smoothing / flows
class FanNotComplete(ToricError):
    pass


class ZeroCovector(ToricError):
    pass


# sheaves
class SignConstructionFailed(ToricError):
    pass


class UnboundedSupport(ToricError):
    pass


# verification
class OriginCone(ToricError):
    pass


class ScheduleTooShort(ToricError):
    pass
