"""Exception hierarchy shared by every module in the package."""


class IpltError(Exception):
    """Base class for all package errors."""


class InversionOfZero(IpltError, ZeroDivisionError):
    """Attempted to invert the zero residue."""


class ShapeError(IpltError, ValueError):
    """Matrix or vector dimensions do not fit the operation."""


class DegeneratePoints(IpltError, ValueError):
    """Evaluation points collide where distinct points are required."""


class FieldTooSmall(IpltError, ValueError):
    """The prime field has too few elements for the requested construction."""


class SamplingExhausted(IpltError, RuntimeError):
    """A rejection sampler hit its retry cap."""


class NotMds(IpltError, ValueError):
    """A matrix that must be MDS has a vanishing maximal minor."""


class RankError(IpltError, ValueError):
    """A matrix is rank deficient, or a linear system is inconsistent."""


class InvalidParameters(IpltError, ValueError):
    """Protocol parameters violate their preconditions."""


class InstanceTooLarge(IpltError, ValueError):
    """An exhaustive routine was asked to run beyond its size cap."""


class StateError(IpltError, ValueError):
    """Client state does not match the answer or branch being processed."""
