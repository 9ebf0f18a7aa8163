"""Exception types raised across the package."""


class ScmaError(Exception):
    """Base class for all errors raised by this package."""


class EmptyMatrix(ScmaError):
    """Signature matrix has no rows or no columns."""


class NonUniformWeights(ScmaError):
    """Signature matrix column or row weights are not uniform and positive."""


class LatinAssignmentInfeasible(ScmaError):
    """No Latin-style rotation assignment exists for the signature matrix."""


class InvalidM(ScmaError):
    """Codebook size must be a power of two, at least 2."""


class DimensionMismatch(ScmaError):
    """Operands have incompatible shapes."""


class LengthMismatch(ScmaError):
    """A bit vector has the wrong length."""


class ZeroNoiseVariance(ScmaError):
    """Noise variance must be strictly positive."""


class ZeroBelief(ScmaError):
    """All belief mass vanished (contradictory or underflowed evidence)."""


class EdgeNotFound(ScmaError):
    """Requested factor-graph edge does not exist."""


class ScheduleInfeasible(ScmaError):
    """Tree schedule requested on a graph with a cycle."""


class StateSpaceTooLarge(ScmaError):
    """Exhaustive enumeration would exceed the configured state cap."""


class ConfigInvalid(ScmaError):
    """Simulation or CLI configuration failed validation."""
