"""Exception hierarchy shared by all leelab modules."""


class LeeLabError(Exception):
    """Base class for every error raised by leelab."""


class DomainError(LeeLabError, ValueError):
    """A spectral parameter or physical input lies outside the admissible region."""


class CeilingError(LeeLabError):
    """A mode count or sector dimension would exceed its configured ceiling."""


class ConvergenceError(LeeLabError):
    """A series, quadrature or eigensolver did not reach the requested tolerance."""


class SingularError(LeeLabError):
    """A matrix that must be inverted is singular at the requested spectral parameter."""


class NoBoundStateError(LeeLabError):
    """The lowest eigenvalue of the principal operator has no sign change in the bracket.

    Attributes
    ----------
    a, b : float
        Bracket endpoints.
    omega_a, omega_b : float
        Lowest eigenvalue of the principal operator at each endpoint.
    """

    def __init__(self, a, b, omega_a, omega_b):
        self.a, self.b = a, b
        self.omega_a, self.omega_b = omega_a, omega_b
        super().__init__(
            f"no sign change of omega_0 on [{a!r}, {b!r}]: "
            f"omega_0(a)={omega_a!r}, omega_0(b)={omega_b!r}"
        )
