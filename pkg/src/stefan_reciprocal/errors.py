"""Exception hierarchy shared across the package."""


class StefanError(Exception):
    """Base class for all library errors."""


class InvalidParameters(StefanError, ValueError):
    """Physical parameters or configuration violate a documented invariant."""


class NoSignChange(StefanError):
    """G - F does not change sign on the root bracket; no admissible root."""


class DomainError(StefanError):
    """Evaluation requested outside the phase region 0 <= y <= S(t), t > 0."""


class SingularTheta(StefanError):
    """|Theta| fell below threshold; the parametric map is singular there."""


class SingularDenominator(StefanError):
    """The denominator T_y*Theta + T^2 vanished; Psi is singular there."""


class QuadratureFailure(StefanError):
    """Adaptive quadrature could not meet the requested error tolerance."""


class OutOfRange(StefanError):
    """Requested coordinate lies outside the invertible interval."""


class NotMonotone(StefanError):
    """x*(., t) is not monotone on [0, S(t)]; inversion is ill-posed."""


class DegenerateDenominator(StefanError):
    """A boundary-coefficient denominator vanished."""


class StabilityViolation(StefanError):
    """Time step exceeds the advection stability bound of the marching scheme."""


class NonmonotoneFront(StefanError):
    """The numerical front position failed to increase over a step."""
