"""Basis solutions of psi'' + (eps - u0/|z|) psi = 0 on both sides of z = 0.

Right of the singular point the basis is

    psi_r1 = exp(-i k z) z M(a, 2, 2 i k z)     (regular, real)
    psi_r2 = exp(-i k z) z U(a, 2, 2 i k z)     (irregular)

with k = sqrt(eps), eta = u0 / (2k) and a = 1 - i eta.  The left basis is the
mirror image, psi_l(z) = psi_r(-z).

The irregular solution is stored in a rescaled frame, psi_r2 = scale * core
with scale = Gamma(1 + i eta).  The real part of the core equals
-exp(-pi eta) psi_r1 / 2 exactly; when eta is large that real part is tiny
compared with the imaginary part, and taking it from the identity rather
than from the subtraction inside U keeps the currents built from psi_r2 at
full relative accuracy.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from . import cfun
from .errors import DomainError, InvariantError, NearSingularityError, RealityError

if TYPE_CHECKING:
    from .scatter import AmplitudeSet

Z_MIN = 1e-8
REALITY_TOL = 1e-10
# agreement required between the identity and the direct real part of core_r2
FRAME_TOL = 1e-8


@dataclass(frozen=True)
class PhysParams:
    """Dimensionless energy and barrier strength.

    Parameters
    ----------
    epsilon : float
        Energy in units of the recoil energy; must be positive.
    u0 : float
        Strength of the repulsive barrier u0/|z|; must be positive.
    """

    epsilon: float
    u0: float

    def __post_init__(self):
        eps, u0 = float(self.epsilon), float(self.u0)
        if not (math.isfinite(eps) and eps > 0.0):
            raise DomainError(f"epsilon must be positive and finite, got {self.epsilon!r}")
        if not (math.isfinite(u0) and u0 > 0.0):
            raise DomainError(f"u0 must be positive and finite, got {self.u0!r}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "u0", u0)

    @property
    def k(self) -> float:
        return math.sqrt(self.epsilon)

    @property
    def eta(self) -> float:
        """Coulomb parameter u0 / (2 sqrt(eps))."""
        return self.u0 / (2.0 * self.k)

    @property
    def a(self) -> complex:
        return complex(1.0, -self.eta)


@dataclass(frozen=True)
class WaveSample:
    """A solution and its derivative at one point, as ``scale * core``."""

    z: float
    core: complex
    core_deriv: complex
    scale: complex = 1 + 0j

    @property
    def value(self) -> complex:
        return self.scale * self.core

    @property
    def deriv(self) -> complex:
        return self.scale * self.core_deriv

    def scaled(self, c: complex) -> "WaveSample":
        return WaveSample(self.z, self.core, self.core_deriv, self.scale * c)


def _check_right(z: float) -> float:
    z = float(z)
    if not z > 0.0:
        raise DomainError(f"right-side solutions need z > 0, got {z!r}")
    return z


def _check_left(z: float) -> float:
    z = float(z)
    if not z < 0.0:
        raise DomainError(f"left-side solutions need z < 0, got {z!r}")
    return z


def _envelope(p: PhysParams, x: float, f: complex, df: complex):
    """exp(-ikx) x f(2ikx) and its x-derivative, given f and df/dw."""
    k = p.k
    ph = cmath.exp(complex(0.0, -k * x))
    val = ph * x * f
    der = ph * ((1 - 1j * k * x) * f + 2j * k * x * df)
    return val, der


def _r1(p: PhysParams, x: float):
    f, df = cfun.kummer_m_pair(p.a, 2, complex(0.0, 2.0 * p.k * x))
    val, der = _envelope(p, x, f, df)
    scale = math.hypot(abs(val), abs(der) / p.k)
    worst = max(abs(val.imag), abs(der.imag) / p.k)
    if worst > REALITY_TOL * scale:
        raise RealityError(
            f"psi_r1 at z={x:g} has imaginary residue {worst / scale:.2e} of its scale"
        )
    return val.real, der.real


def _r2_frame(p: PhysParams, x: float, r1: tuple[float, float] | None = None):
    """Core of psi_r2 in the Gamma(1 + i eta) frame, plus the scale."""
    if x < Z_MIN:
        raise NearSingularityError(
            f"|z| = {x:g} is inside the guard band {Z_MIN:g} of the irregular solution"
        )
    f, df = cfun.tricomi_u_pair(p.a, complex(0.0, 2.0 * p.k * x))
    lg = cfun.log_gamma(complex(1.0, p.eta))
    inv = cmath.exp(-lg)
    val, der = _envelope(p, x, f * inv, df * inv)
    if r1 is None:
        r1 = _r1(p, x)
    damp = 0.5 * math.exp(-math.pi * p.eta)
    re_val, re_der = -damp * r1[0], -damp * r1[1]
    norm = math.hypot(abs(val), abs(der) / p.k)
    drift = max(abs(val.real - re_val), abs(der.real - re_der) / p.k)
    if drift > FRAME_TOL * norm:
        raise InvariantError("real part of the rescaled irregular solution drifted", drift / norm)
    core = complex(re_val, val.imag)
    core_der = complex(re_der, der.imag)
    return core, core_der, cmath.exp(lg)


def psi_r1(p: PhysParams, z: float) -> WaveSample:
    """Regular right-side solution; real valued.

    Raises
    ------
    DomainError
        If ``z <= 0``.
    RealityError
        If the evaluation leaves an imaginary part above 1e-10 of the local
        scale hypot(|psi|, |psi'|/k).
    """
    z = _check_right(z)
    val, der = _r1(p, z)
    return WaveSample(z, complex(val), complex(der))


def psi_r2(p: PhysParams, z: float) -> WaveSample:
    """Irregular right-side solution; its derivative diverges like log z."""
    z = _check_right(z)
    core, core_der, scale = _r2_frame(p, z)
    return WaveSample(z, core, core_der, scale)


def psi_l1(p: PhysParams, z: float) -> WaveSample:
    """Regular left-side solution, -exp(ikz) z M(a, 2, -2ikz) for z < 0."""
    z = _check_left(z)
    val, der = _r1(p, -z)
    return WaveSample(z, complex(val), complex(-der))


def psi_l2(p: PhysParams, z: float) -> WaveSample:
    """Irregular left-side solution, -exp(ikz) z U(a, 2, -2ikz) for z < 0."""
    z = _check_left(z)
    core, core_der, scale = _r2_frame(p, -z)
    return WaveSample(z, core, -core_der, scale)


def basis(p: PhysParams, z: float) -> tuple[WaveSample, WaveSample]:
    """Both basis solutions on the side of ``z``, sharing one M evaluation."""
    z = float(z)
    if z == 0.0:
        raise DomainError("the basis is undefined at the singular point z = 0")
    x = abs(z)
    r1 = _r1(p, x)
    core, core_der, scale = _r2_frame(p, x, r1)
    sgn = 1.0 if z > 0 else -1.0
    first = WaveSample(z, complex(r1[0]), complex(sgn * r1[1]))
    second = WaveSample(z, core, sgn * core_der, scale)
    return first, second


def psi_general(p: PhysParams, amps: "AmplitudeSet", z: float) -> WaveSample:
    """Superposition a_1 psi_1 + a_2 psi_2 with the amplitudes of the side of z."""
    z = float(z)
    if z == 0.0:
        raise DomainError("the general solution is not evaluated at z = 0")
    if z > 0:
        c1, c2 = amps.a_r1, amps.a_r2
    else:
        c1, c2 = amps.a_l1, amps.a_l2
    if c2 == 0:
        first = psi_r1(p, z) if z > 0 else psi_l1(p, z)
        return WaveSample(z, c1 * first.value, c1 * first.deriv)
    first, second = basis(p, z)
    val = c1 * first.value + c2 * second.value
    der = c1 * first.deriv + c2 * second.deriv
    return WaveSample(z, val, der)
