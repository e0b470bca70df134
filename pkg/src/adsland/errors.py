"""Exception hierarchy shared by all modules."""


class AdslandError(Exception):
    """Base class for every error raised by the package."""


class NotSPD(AdslandError, ValueError):
    pass


class NotNormalizedPair(AdslandError, ValueError):
    pass


class SingularOperator(AdslandError, ValueError):
    pass


class NotSelfAdjoint(AdslandError, ValueError):
    pass


class NotUnimodular(AdslandError, ValueError):
    pass


class BadAngle(AdslandError, ValueError):
    pass


class BadCurvature(AdslandError, ValueError):
    pass


class OutOfDomain(AdslandError, ValueError):
    pass


class GridTooCoarse(AdslandError, ValueError):
    pass


class Inadmissible(AdslandError, ValueError):
    pass


class FlowDegenerate(AdslandError, ValueError):
    pass


class NotStrictlyConvex(AdslandError, ValueError):
    pass


class DegenerateFace(AdslandError, ValueError):
    pass


class NotHarmonic(AdslandError, ValueError):
    pass


class InversionFailure(AdslandError, ValueError):
    pass


class NoConvergence(AdslandError, RuntimeError):
    pass


class NotConverged(NoConvergence):
    pass


class ConfigError(AdslandError, ValueError):
    pass


class CheckFailure(AdslandError):
    """At least one registered check of a run failed."""


class IoError(AdslandError, OSError):
    pass
