"""Exception hierarchy shared by all aeroacm modules."""


class AeroAcmError(Exception):
    """Base class for every error raised by this package."""


class DomainError(AeroAcmError):
    """A numeric argument is outside its physically meaningful domain."""


class DimensionMismatch(AeroAcmError):
    """Matrix or vector shapes are incompatible with the requested operation."""


class NotHermitian(AeroAcmError):
    """A matrix required to be Hermitian fails the symmetry tolerance."""


class NotPSD(AeroAcmError):
    """A matrix required to be positive semidefinite has a negative eigenvalue."""


class Singular(AeroAcmError):
    """A linear system is singular or not positive definite."""


class IndexOutOfRange(AeroAcmError):
    """A block or antenna index is outside the valid range."""


class InvalidAxis(AeroAcmError):
    """An unknown sweep axis name was requested."""


class EmptySamples(AeroAcmError):
    """A statistic was requested over an empty sample set."""


class EmptyTable(AeroAcmError):
    """No ACM mode is feasible for the given rate curve."""


class OutOfRange(AeroAcmError):
    """Distance beyond the maximum supported communication range."""


class BelowMinimumSeparation(AeroAcmError):
    """Distance below the minimum aircraft separation, not supported."""


class ConfigError(AeroAcmError):
    """A scenario file or config object is invalid; message names the key."""
