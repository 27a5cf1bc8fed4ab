"""Exception hierarchy shared by every module."""


class MomentError(ValueError):
    """Base class for all library errors."""


class DimensionMismatchError(MomentError):
    pass


class DegreeMismatchError(MomentError):
    pass


class OddDegreeError(MomentError):
    pass


class DuplicatePointsError(MomentError):
    pass


class NotSymmetricError(MomentError):
    pass


class SingularMatrixError(MomentError):
    pass


class SingularAfterRetriesError(MomentError):
    pass


class SamplingExhaustedError(MomentError):
    pass


class NotInVarietyError(MomentError):
    pass


class ZeroGaugeError(MomentError):
    pass


class NoLinearRelationError(MomentError):
    pass


class InsufficientDegreeError(MomentError):
    pass


class SingularLeadingHankelError(MomentError):
    pass


class ComplexRootsError(MomentError):
    pass
