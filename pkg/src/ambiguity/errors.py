"""Exception hierarchy.

``InvalidInput`` covers malformed or inconsistent data (the CLI maps it to
exit code 2); ``VerdictFailure`` covers well-formed input whose semantic check
came out negative (exit code 3).
"""


class AmbiguityError(Exception):
    pass


class InvalidInput(AmbiguityError, ValueError):
    pass


class VerdictFailure(AmbiguityError):
    pass


class NameClash(InvalidInput):
    """Two factors share a name but not their settings/outcomes."""


class OverlappingDomains(InvalidInput):
    pass


class DomainMismatch(InvalidInput):
    pass


class KnobDomainMismatch(DomainMismatch):
    pass


class DimMismatch(InvalidInput):
    pass


class NotNormalized(InvalidInput):
    pass


class InvalidOperator(InvalidInput):
    """Matrix fails hermiticity, positivity, trace or completeness checks."""


class UnknownDetector(InvalidInput):
    pass


class CannotDropAll(InvalidInput):
    pass


class FactorizationInvalid(InvalidInput):
    pass


class PairInvalid(InvalidInput):
    pass


class DetectorTooSmall(InvalidInput):
    pass


class ChainAmbiguity(InvalidInput):
    """Single-linkage clustering produced a class wider than ``eps_eq``."""


class GrowthCapExceeded(InvalidInput):
    pass


class NotAnExplanation(VerdictFailure):
    pass


class NoInequivalentPair(VerdictFailure):
    pass
