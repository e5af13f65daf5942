"""Scattering amplitudes, transmission and reflection, and energy scans.

The wave comes in from the left.  With the irregular amplitude normalised
to a_r2 = 1 the remaining amplitudes follow from three conditions: equal
irregular amplitudes on both sides, no wave arriving from the right, and
continuity of the probability current through z = 0.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from . import cfun
from .errors import CoulombTunnelError, DegenerateTableError, DomainError
from .flux import CurrentTable, current_table, total_current
from .wavefield import PhysParams

LN2 = math.log(2.0)
HALF_PI = 0.5 * math.pi

# |a_r1| ~ exp(-1.5 pi eta); below this log-magnitude the amplitudes underflow
LOG_TINY = math.log(1e-280)
DEFAULT_EPS_FLOOR = 1e-6
EPS_FLOOR_ENV = "COULOMB_TUNNEL_EPS_FLOOR"

FLUX_TOL = 1e-6
DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class AmplitudeSet:
    """Coefficients of the two basis solutions on each side."""

    a_l1: complex
    a_l2: complex
    a_r1: complex
    a_r2: complex

    def scaled(self, c: complex) -> "AmplitudeSet":
        return AmplitudeSet(self.a_l1 * c, self.a_l2 * c, self.a_r1 * c, self.a_r2 * c)


@dataclass(frozen=True)
class TunnelResult:
    """Outcome of a single-energy scattering calculation.

    ``status`` is ``"ok"``, ``"underflow"`` (deep-suppression regime beyond
    double range, T and R are NaN) or ``"error:<message>"``.
    """

    epsilon: float
    u0: float
    T: float
    R: float
    c_inc: complex
    c_tr: complex
    c_refl: complex
    amps: AmplitudeSet | None
    diagnostics: dict = field(default_factory=dict)
    status: str = "ok"

    @property
    def flux_imbalance(self) -> float:
        return abs(self.T + self.R - 1.0)


@dataclass(frozen=True)
class ScanRow:
    epsilon: float
    T: float
    R: float
    flux_imbalance: float
    im_a_r1: float
    status: str


COLUMNS = ("epsilon", "T", "R", "flux_imbalance", "im_a_r1", "status")


@dataclass(frozen=True)
class EnergyGrid:
    """``points`` energies between ``emin`` and ``emax`` inclusive."""

    emin: float
    emax: float
    points: int
    spacing: Literal["log", "linear"] = "log"

    def __post_init__(self):
        if self.points < 0:
            raise DomainError("points must be non-negative")
        if not (self.emin > 0 and self.emax >= self.emin):
            raise DomainError("need 0 < emin <= emax")
        if self.spacing not in ("log", "linear"):
            raise DomainError(f"unknown spacing {self.spacing!r}")

    def values(self) -> np.ndarray:
        if self.points == 0:
            return np.empty(0)
        if self.points == 1:
            return np.array([float(self.emin)])
        if self.spacing == "log":
            return np.geomspace(self.emin, self.emax, self.points)
        return np.linspace(self.emin, self.emax, self.points)


def eps_floor() -> float:
    """Smallest energy a scan accepts; ``COULOMB_TUNNEL_EPS_FLOOR`` overrides."""
    raw = os.environ.get(EPS_FLOOR_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_EPS_FLOOR
    try:
        value = float(raw)
    except ValueError as exc:
        raise DomainError(f"{EPS_FLOOR_ENV}={raw!r} is not a number") from exc
    if not value > 0:
        raise DomainError(f"{EPS_FLOOR_ENV} must be positive")
    return value


def _log_ik(k: float, sign: int) -> complex:
    """Principal log of (sign * i * k)."""
    return complex(math.log(k), sign * HALF_PI)


def log_radiation_amplitude(p: PhysParams) -> complex:
    """Principal log of a_r1 for a_r2 = 1."""
    s = complex(-1.0, p.eta)
    # -(ik)^s / (-ik)^s = exp(i pi) exp(s (log ik - log(-ik)))
    ratio = s * (_log_ik(p.k, 1) - _log_ik(p.k, -1)) + complex(0.0, math.pi)
    return ratio + cfun.log_gamma(complex(1.0, p.eta))


def deep_suppression(p: PhysParams) -> bool:
    """True when a_r1 is below the double-precision range."""
    return log_radiation_amplitude(p).real < LOG_TINY


def radiation_amplitude(p: PhysParams) -> complex:
    """a_r1 for a_r2 = 1, from the no-incoming-wave condition on the right.

    Returns ``0j`` in the deep-suppression regime; check
    :func:`deep_suppression` to tell that apart from a genuine zero.
    """
    lg = log_radiation_amplitude(p)
    if lg.real < LOG_TINY:
        return 0j
    return cmath.exp(lg)


def continuity_amplitude(
    p: PhysParams, a_r1: complex, a_r2: complex, table: CurrentTable
) -> complex:
    """a_l1 from continuity of the current through the singular point.

    Uses a_l1 = -a_r1 - (j_l22 / Re j_l12) a_r2, which with j_l22 = -j_r22
    is the real-amplitude balance 2 a_l1 Re j_l12 + j_l22 = 2 a_r1 Re j_r12 + j_r22.

    Raises
    ------
    DegenerateTableError
        When Re j_l12 vanishes relative to |j_l12| (transmission zero).
    """
    j12 = table.jl[0][1]
    re12 = j12.real
    if abs(re12) <= DEGENERATE_TOL * abs(j12):
        raise DegenerateTableError(f"Re j_l12 = {re12:.3e} vanishes at {p}")
    return -a_r1 - (table.jl[1][1] / re12) * a_r2


def solve(
    p: PhysParams, a_r2: complex = 1.0, table: CurrentTable | None = None
) -> AmplitudeSet:
    """All four amplitudes for the given irregular amplitude (default 1)."""
    if table is None:
        table = current_table(p)
    a_r2 = complex(a_r2)
    a_r1 = radiation_amplitude(p) * a_r2
    a_l1 = continuity_amplitude(p, a_r1, a_r2, table)
    return AmplitudeSet(a_l1=a_l1, a_l2=a_r2, a_r1=a_r1, a_r2=a_r2)


def asymptotic_amplitudes(p: PhysParams, amps: AmplitudeSet) -> tuple[complex, complex, complex]:
    """Prefactors of exp(+-ikz) in the incident, transmitted and reflected waves.

    The logarithmic Coulomb phases are evaluated at |z| = 1: z^(-i eta) at
    z = +1 for the transmitted wave, and (1/z)^(-+i eta) at z = -1 on the
    principal branch for the incident and reflected waves.  At z = -1 those
    factors are exp(+pi eta) and exp(-pi eta), not pure phases, and they are
    kept.
    """
    eta = p.eta
    s = complex(-1.0, eta)
    log_ik = _log_ik(p.k, 1)
    log_mik = _log_ik(p.k, -1)
    lg_plus = cfun.log_gamma(complex(1.0, eta))
    lg_minus = cfun.log_gamma(complex(1.0, -eta))
    sbar = complex(-1.0, -eta)

    c_tr = cmath.exp(sbar * LN2 + sbar * log_ik - lg_minus) * amps.a_r1

    # (1/z)^(-i eta) at z = -1 contributes exp(+pi eta); 2 i pi s adds exp(-2 pi eta)
    incoming = cmath.exp(s * log_ik - lg_plus) * amps.a_l1
    incoming += cmath.exp(2j * math.pi * s + s * log_mik) * amps.a_l2
    c_inc = -cmath.exp(s * LN2 + math.pi * eta) * incoming

    # exp(pi u0/k) = exp(2 pi eta); (1/z)^(+i eta) at z = -1 gives exp(-pi eta)
    c_refl = -cmath.exp(sbar * LN2 + 2.0 * math.pi * eta + sbar * log_mik - lg_minus - math.pi * eta)
    c_refl *= amps.a_l1
    return c_inc, c_tr, c_refl


def _failed(p: PhysParams, status: str, diagnostics: dict | None = None) -> TunnelResult:
    nan = math.nan
    cnan = complex(nan, nan)
    return TunnelResult(p.epsilon, p.u0, nan, nan, cnan, cnan, cnan, None, diagnostics or {}, status)


def transmission(p: PhysParams, z_ref: float = 1.0) -> TunnelResult:
    """T and R for a wave incident from the left.

    Computation errors are caught and turned into an ``error:`` status, so a
    scan sees them in-row.
    """
    lg = log_radiation_amplitude(p)
    im_a_r1 = math.exp(lg.real) * math.sin(lg.imag) if lg.real > LOG_TINY else 0.0
    if lg.real < LOG_TINY:
        return _failed(p, "underflow", {"log_abs_a_r1": lg.real, "im_a_r1": 0.0})
    try:
        table = current_table(p, z_ref)
        amps = solve(p, 1.0, table)
        c_inc, c_tr, c_refl = asymptotic_amplitudes(p, amps)
        j_left = total_current(p, amps, table, "left")
        j_right = total_current(p, amps, table, "right")
    except CoulombTunnelError as exc:
        return _failed(p, f"error:{type(exc).__name__}: {exc}", {"im_a_r1": im_a_r1})
    # ratios before squaring: near the underflow limit |c|^2 itself leaves double range
    T = abs(c_tr / c_inc) ** 2
    R = abs(c_refl / c_inc) ** 2
    scale = max(abs(table.jr[1][1]), abs(j_left), abs(j_right))
    diag = {
        "flux_imbalance": abs(T + R - 1.0),
        "r_cross": abs(R - (1.0 - T)),
        "im_a_r1": im_a_r1,
        "im_a_l1": amps.a_l1.imag,
        "current_left": j_left,
        "current_right": j_right,
        "continuity_residual": abs(j_left - j_right) / scale,
        **{f"table_{name}": value for name, value in table.diagnostics.items()},
    }
    status = "ok"
    if not diag["flux_imbalance"] <= FLUX_TOL:
        status = f"error:flux imbalance {diag['flux_imbalance']:.3e}"
    return TunnelResult(p.epsilon, p.u0, T, R, c_inc, c_tr, c_refl, amps, diag, status)


def to_row(result: TunnelResult) -> ScanRow:
    return ScanRow(
        epsilon=result.epsilon,
        T=result.T,
        R=result.R,
        flux_imbalance=abs(result.T + result.R - 1.0),
        im_a_r1=result.diagnostics.get("im_a_r1", math.nan),
        status=result.status,
    )


def _row_at(args: tuple[float, float]) -> ScanRow:
    eps, u0 = args
    try:
        p = PhysParams(eps, u0)
    except CoulombTunnelError as exc:
        nan = math.nan
        return ScanRow(eps, nan, nan, nan, nan, f"error:{exc}")
    return to_row(transmission(p))


def _energies(grid: EnergyGrid | Iterable[float]) -> list[float]:
    values = grid.values() if isinstance(grid, EnergyGrid) else grid
    out = [float(e) for e in values]
    floor = eps_floor()
    for prev, cur in zip(out, out[1:]):
        if not cur > prev:
            raise DomainError("energy grid must be strictly increasing")
    if out and not out[0] >= floor:
        raise DomainError(
            f"energy {out[0]:g} is below the floor {floor:g} (set {EPS_FLOOR_ENV} to change it)"
        )
    return out


def scan(u0: float, grid: EnergyGrid | Sequence[float], jobs: int = 1) -> list[ScanRow]:
    """T(eps) at fixed u0 over a grid, one row per energy in grid order.

    Parameters
    ----------
    u0 : float
    grid : EnergyGrid or sequence of float
        Strictly increasing positive energies, none below :func:`eps_floor`.
    jobs : int
        Worker processes; rows are independent and come back in grid order.
    """
    energies = _energies(grid)
    tasks = [(e, float(u0)) for e in energies]
    if jobs <= 1 or len(tasks) < 2:
        return [_row_at(t) for t in tasks]
    chunk = max(1, len(tasks) // (8 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_row_at, tasks, chunksize=chunk))


@dataclass(frozen=True)
class Census:
    """Local maxima of T inside an energy window.

    Attributes
    ----------
    count : int
        Strict interior maxima; a plateau of equal values counts once.
    positions : tuple of float
        Energies of the maxima (plateau midpoints).
    min_separation : int or None
        Fewest samples between neighbouring maxima.
    under_resolved : bool
        Neighbouring maxima closer than ``MIN_SEPARATION`` samples.
    samples : int
    """

    count: int
    positions: tuple[float, ...]
    min_separation: int | None
    under_resolved: bool
    samples: int


MIN_SEPARATION = 4


def oscillation_census(rows: Sequence[ScanRow], window: tuple[float, float]) -> Census:
    """Count strict local maxima of T for rows with energy inside ``window``.

    Rows without a finite T split the sequence; a maximum needs a lower
    finite neighbour on both sides within the window.
    """
    lo, hi = window
    pts = [(r.epsilon, r.T) for r in rows if lo <= r.epsilon <= hi]
    pts.sort()
    idx: list[float] = []
    positions: list[float] = []
    n = len(pts)
    i = 1
    while i < n - 1:
        e, t = pts[i]
        left = pts[i - 1][1]
        if not (math.isfinite(t) and math.isfinite(left)) or not t > left:
            i += 1
            continue
        j = i
        while j + 1 < n and pts[j + 1][1] == t:
            j += 1
        if j + 1 < n and math.isfinite(pts[j + 1][1]) and pts[j + 1][1] < t:
            mid = (i + j) / 2.0
            idx.append(mid)
            lo_e, hi_e = pts[i][0], pts[j][0]
            positions.append(0.5 * (lo_e + hi_e))
        i = j + 1
    gaps = [int(round(b - a)) for a, b in zip(idx, idx[1:])]
    min_sep = min(gaps) if gaps else None
    return Census(
        count=len(idx),
        positions=tuple(positions),
        min_separation=min_sep,
        under_resolved=min_sep is not None and min_sep < MIN_SEPARATION,
        samples=n,
    )
