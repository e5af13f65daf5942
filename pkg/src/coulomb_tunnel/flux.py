"""Probability-current bilinears of the basis solutions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal

from .errors import DomainError, InvariantError
from .wavefield import PhysParams, WaveSample, basis

if TYPE_CHECKING:
    from .scatter import AmplitudeSet

KAPPA = 1.0

ZERO_TOL = 1e-10
SYMMETRY_TOL = 1e-9
DRIFT_TOL = 1e-8
REAL_TOL = 1e-10

Matrix = tuple[tuple[complex, complex], tuple[complex, complex]]


def bilinear(psi_m: WaveSample, psi_n: WaveSample) -> complex:
    """i kappa (psi_m conj(psi_n') - psi_m' conj(psi_n)).

    The products are formed on the cores and the scales applied afterwards,
    so a basis solution kept in a rescaled frame loses no accuracy here.
    """
    if psi_m.z != psi_n.z:
        raise DomainError(f"samples taken at different points: {psi_m.z!r} vs {psi_n.z!r}")
    c, dc = psi_n.core, psi_n.core_deriv
    if psi_m.core == c and psi_m.core_deriv == dc:
        # same core: c conj(c') - c' conj(c) = 2i Im(c conj(c')), which
        # avoids the products |c|^2 that overflow once the cores of the
        # irregular solution pass 1e154 (small eps)
        im = c.imag * dc.real - c.real * dc.imag
        return -2.0 * KAPPA * psi_m.scale * psi_n.scale.conjugate() * im
    inner = psi_m.core * dc.conjugate() - psi_m.core_deriv * c.conjugate()
    return 1j * KAPPA * psi_m.scale * psi_n.scale.conjugate() * inner


def _matrix(samples: tuple[WaveSample, WaveSample]) -> Matrix:
    s1, s2 = samples
    return (
        (bilinear(s1, s1), bilinear(s1, s2)),
        (bilinear(s2, s1), bilinear(s2, s2)),
    )


def _rel(x: complex, y: complex) -> float:
    ref = max(abs(x), abs(y))
    return 0.0 if ref == 0.0 else abs(x - y) / ref


@dataclass(frozen=True)
class CurrentTable:
    """Current bilinears j[m][n] (1-based in the physics, 0-based here).

    Attributes
    ----------
    jl, jr : tuple of tuple of complex
        Left and right tables; ``jr[0][1]`` is j_r12.
    z_ref : float
        |z| at which the samples were taken.
    diagnostics : dict
        Worst relative deviation of every structural identity that was checked.
    """

    jl: Matrix
    jr: Matrix
    z_ref: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def side(self, which: Literal["left", "right"]) -> Matrix:
        if which == "left":
            return self.jl
        if which == "right":
            return self.jr
        raise DomainError(f"side must be 'left' or 'right', got {which!r}")


def check_table(jl: Matrix, jr: Matrix) -> dict:
    """Deviations of the structural identities of a current table."""
    scale = max(abs(jr[0][1]), abs(jl[0][1]))
    return {
        "j11_zero": max(abs(jl[0][0]), abs(jr[0][0])) / scale,
        "hermitian": max(
            _rel(jl[1][0], jl[0][1].conjugate()), _rel(jr[1][0], jr[0][1].conjugate())
        ),
        "j12_mirror": _rel(jl[0][1], -jr[0][1]),
        "j22_mirror": _rel(jl[1][1], -jr[1][1]),
    }


_LIMITS = {
    "j11_zero": ZERO_TOL,
    "hermitian": SYMMETRY_TOL,
    "j12_mirror": SYMMETRY_TOL,
    "j22_mirror": SYMMETRY_TOL,
    "z_drift": DRIFT_TOL,
}


def _tables_at(p: PhysParams, z: float) -> tuple[Matrix, Matrix]:
    right = basis(p, z)
    left = basis(p, -z)
    return _matrix(left), _matrix(right)


def current_table(
    p: PhysParams,
    z_ref: float = 1.0,
    cross_check: tuple[float, ...] = (0.5, 2.0),
) -> CurrentTable:
    """Build and verify the left/right current tables.

    Parameters
    ----------
    p : PhysParams
    z_ref : float
        Sampling distance from the singular point, within [0.1, 10].
    cross_check : tuple of float
        Multipliers of ``z_ref`` at which the table is recomputed to confirm
        that it does not depend on position.  Empty disables the check.

    Raises
    ------
    InvariantError
        If any identity is off by more than its tolerance.
    """
    z_ref = float(z_ref)
    if not 0.1 <= z_ref <= 10.0:
        raise DomainError(f"z_ref must lie in [0.1, 10], got {z_ref!r}")
    jl, jr = _tables_at(p, z_ref)
    diag = check_table(jl, jr)
    drift = 0.0
    for mult in cross_check:
        ol, o_r = _tables_at(p, z_ref * mult)
        for ta, tb in ((jl, ol), (jr, o_r)):
            for m, n in ((0, 1), (1, 0), (1, 1)):
                drift = max(drift, _rel(ta[m][n], tb[m][n]))
    diag["z_drift"] = drift
    for name, value in diag.items():
        if not value <= _LIMITS[name]:
            raise InvariantError(f"current identity {name} violated at {p}", value)
    return CurrentTable(jl, jr, z_ref, diag)


def total_current(
    p: PhysParams,
    amps: "AmplitudeSet",
    table: CurrentTable,
    side: Literal["left", "right"],
) -> float:
    """sum_mn a_m conj(a_n) j_mn on one side; real for a valid table."""
    j = table.side(side)
    if side == "left":
        c = (amps.a_l1, amps.a_l2)
    else:
        c = (amps.a_r1, amps.a_r2)
    total = 0j
    size = 0.0
    for m in range(2):
        for n in range(2):
            term = c[m] * c[n].conjugate() * j[m][n]
            total += term
            size += abs(term)
    if abs(total.imag) > REAL_TOL * max(size, 1e-300):
        raise InvariantError("total current came out complex", abs(total.imag) / size)
    return total.real
