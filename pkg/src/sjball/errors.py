"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`SJBError`,
so callers can catch the whole family with one clause.
"""


class SJBError(Exception):
    """Base class for library errors."""


class NonFiniteError(SJBError, ValueError):
    """Input contains NaN or infinite entries."""


class NotSymmetricError(SJBError, ValueError):
    """A matrix that must be symmetric is not, beyond tolerance."""


class NotInBallError(SJBError, ValueError):
    """``I - W conj(W)`` is not positive definite."""


class NotInHalfPlaneError(SJBError, ValueError):
    """Imaginary part of a half-plane point is not positive definite."""


class SingularError(SJBError, ArithmeticError):
    """A matrix that has to be inverted is numerically singular."""


class SingularMetricError(SingularError):
    """The metric degenerates (for instance ``mu = 0``)."""


class StepTooLargeError(SJBError, ValueError):
    """A finite-difference stencil leaves the domain."""


class StepFailure(SJBError, RuntimeError):
    """The ODE integrator could not advance."""


class InvalidElementError(SJBError, ValueError):
    """Group element violates the symplectic constraints."""


class InvalidStateError(SJBError, ValueError):
    """Geodesic state is malformed or outside the ball."""


class InsufficientSamplesError(SJBError, ValueError):
    """Too few samples for the requested finite-difference stencil."""


class OutOfRangeError(SJBError, IndexError):
    """Index or label outside the coordinate chart."""


class OverflowWarningError(SJBError, OverflowError):
    """Kernel value would overflow; use the logarithmic variant."""
