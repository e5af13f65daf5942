"""Exception hierarchy shared by the numerical modules."""

from __future__ import annotations


class CoulombTunnelError(Exception):
    """Base class for every error raised by this package."""


class PoleError(CoulombTunnelError, ValueError):
    """A function was evaluated at one of its poles."""


class DomainError(CoulombTunnelError, ValueError):
    """An argument lies outside the domain of an operation."""


class NearSingularityError(DomainError):
    """The coordinate is inside the guard band around z = 0."""


class ConvergenceError(CoulombTunnelError, ArithmeticError):
    """A series or iteration exhausted its term budget.

    Parameters
    ----------
    message : str
        Human readable description.
    partial_sum : float
        Magnitude of the partial sum when the budget ran out.
    """

    def __init__(self, message: str, partial_sum: float = float("nan")):
        super().__init__(f"{message} (|partial sum| = {partial_sum:.3e})")
        self.partial_sum = partial_sum


class PrecisionError(CoulombTunnelError, ArithmeticError):
    """Cancellation exceeded the working precision of the reference evaluator."""

    def __init__(self, message: str, digits_needed: int):
        super().__init__(message)
        self.digits_needed = digits_needed


class RealityError(CoulombTunnelError, ArithmeticError):
    """A function that must be real came out with a sizeable imaginary part."""


class InvariantError(CoulombTunnelError, ArithmeticError):
    """A structural identity failed beyond its tolerance."""

    def __init__(self, message: str, worst: float):
        super().__init__(f"{message} (worst relative deviation {worst:.3e})")
        self.worst = worst


class DegenerateTableError(CoulombTunnelError, ArithmeticError):
    """Re j_l12 vanishes, so the continuity equation cannot fix a_l1."""


class IntegrationError(CoulombTunnelError, ArithmeticError):
    """The cutoff integrator failed its own flux bookkeeping or step bounds."""
