"""Exception hierarchy.

Everything raised on bad input derives from :class:`KotzTailError`, which is
itself a ``ValueError`` so callers that only care about "bad arguments" can
catch that.
"""


class KotzTailError(ValueError):
    pass


# linalg
class NotSymmetric(KotzTailError):
    pass


class NotCorrelation(KotzTailError):
    pass


class NotPositiveDefinite(KotzTailError):
    pass


class IndexOutOfRange(KotzTailError):
    pass


class EmptyComplement(KotzTailError):
    pass


class DimensionMismatch(KotzTailError):
    pass


# quadratic program
class NoPositiveComponent(KotzTailError):
    pass


class OracleAmbiguous(KotzTailError):
    pass


# model
class NonPositiveArgument(KotzTailError):
    pass


class InvalidShape(KotzTailError):
    pass


class InconsistentP(KotzTailError):
    pass


# tail / limit laws
class NormalizationViolated(KotzTailError):
    pass


class NegativeThresholdOnJ(KotzTailError):
    pass


class ConditionViolated(KotzTailError):
    pass


class OutOfRange(KotzTailError):
    pass


# estimation
class NonPositiveOrderStatistic(KotzTailError):
    pass


class KnTooLarge(KotzTailError):
    pass


class DegenerateSample(KotzTailError):
    pass


class InsufficientData(KotzTailError):
    pass


# validation
class TooFewExceedances(KotzTailError):
    pass
