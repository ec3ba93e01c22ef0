"""Exception types shared across the library.

Every numerical failure mode that callers are expected to handle gets its
own class; messages carry the measured quantity that triggered the error.
"""


class ConelabError(Exception):
    """Base class for all library errors."""


# -- linear algebra core -----------------------------------------------------

class NotHermitian(ConelabError):
    pass


class NoConvergence(ConelabError):
    pass


class SpectralGapViolation(ConelabError):
    pass


class AmbiguousRank(ConelabError):
    pass


class SpaceMismatch(ConelabError):
    pass


class ShapeMismatch(ConelabError):
    pass


class NotPSD(ConelabError):
    pass


# -- circle / cone models ----------------------------------------------------

class DegreeOverflow(ConelabError):
    pass


class PoleOnRealAxis(ConelabError):
    pass


class MatchingViolation(ConelabError):
    pass


class GridMismatch(ConelabError):
    pass


class NonInvertibleB(ConelabError):
    pass


# -- index engine ------------------------------------------------------------

class Inconclusive(ConelabError):
    pass


class UnderSampled(ConelabError):
    pass


class NotFactorized(ConelabError):
    pass


class NotElliptic(ConelabError):
    pass


# -- resolutions -------------------------------------------------------------

class NotInvertible(ConelabError):
    pass


class NotInvertibleRestriction(ConelabError):
    pass


class NotAComplex(ConelabError):
    pass


class InfeasibleRanks(ConelabError):
    pass


# -- CLI ---------------------------------------------------------------------

class ConfigError(ConelabError):
    pass


class UnknownName(ConelabError):
    pass
