"""Exception taxonomy.

Every failure mode the toolkit detects is a named subclass of FaceGeomError,
so batch tooling can report and filter by error name instead of message
matching. Messages carry the offending field and image/subject id where one
exists.
"""


class FaceGeomError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(FaceGeomError):
    """Document or manifest does not match the expected shape."""


class MissingField(SchemaError):
    pass


class WrongLandmarkCount(SchemaError):
    pass


class OutOfRangeCoordinate(SchemaError):
    pass


class ZeroNormEmbedding(SchemaError):
    pass


class NegativeAge(SchemaError):
    pass


class DuplicateSubjectId(FaceGeomError):
    pass


class MissingRecordFile(FaceGeomError):
    pass


class RolePairingError(FaceGeomError):
    pass


class EmptyCohort(FaceGeomError):
    pass


class DegenerateEyeDistance(FaceGeomError):
    pass


class EmptyPointSet(FaceGeomError):
    pass


class EmptySide(FaceGeomError):
    pass


class DegenerateDenominator(FaceGeomError):
    pass


class MissingAge(FaceGeomError):
    pass


class DimensionMismatch(FaceGeomError):
    pass


class ZeroNorm(FaceGeomError):
    pass


class MissingEmbedding(FaceGeomError):
    pass


class EmptyImposterSet(FaceGeomError):
    pass


class EmptyGenuineSet(FaceGeomError):
    pass


class TooFewPairs(FaceGeomError):
    pass


class AllZeroDifferences(FaceGeomError):
    pass


class ZeroVariance(FaceGeomError):
    pass


class InconsistentCoverage(FaceGeomError):
    pass
