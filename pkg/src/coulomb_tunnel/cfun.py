"""
Complex special functions for the confluent hypergeometric equation
====================================================================

Double precision evaluators for

- ``log_gamma(z)``: log Γ(z), continuous off the negative real axis;
- ``kummer_m(a, b, z)``: Kummer's ₁F₁(a; b; z) = M(a, b, z);
- ``tricomi_u_b2(a, z)``: Tricomi's U(a, 2, z) at the integer parameter b = 2;

and their z-derivatives. All complex powers use the principal logarithm,
arg ∈ (−π, π].

Regimes
-------
Each evaluator tries the cheapest representation first and keeps it only if
cancellation leaves the requested accuracy intact:

1. Maclaurin series (M) or the logarithmic integer-b expansion (U) near 0.
2. Large-|z| asymptotic expansion once |z| ≥ ``asymptotic_switch`` and the
   expansion actually reaches the tolerance.
3. Taylor-series continuation of the ODE  z y'' + (b − z) y' − a y = 0.
   M is carried outward from a small circle, where it is dominant;
   U is carried inward from the asymptotic region on the same ray, where it
   is recessive or neutral. For Re z < 0, U is obtained from the connection
   formula with M and U(2 − a, 2, −z) instead.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError, PoleError

__all__ = [
    "SeriesControl",
    "DEFAULT_CONTROL",
    "log_gamma",
    "rgamma",
    "digamma",
    "kummer_m",
    "kummer_m_dz",
    "kummer_m_pair",
    "tricomi_u_b2",
    "tricomi_u_dz",
    "tricomi_u_pair",
]

_EPS = 2.0 ** -52
_LOG_2PI_HALF = 0.5 * math.log(2.0 * math.pi)
# Summation stops once terms drop below tol * _TAIL of the running sum.
_TAIL = 1e-4
# Largest |z| for which the Maclaurin series is attempted outright.
_MACLAURIN_RADIUS = 2.0
# Taylor continuation: step bound relative to |z0| and absolute cap.
_STEP_FRACTION = 0.5
_STEP_MAX = 4.0


@dataclass(frozen=True)
class SeriesControl:
    """Numerical knobs for the series evaluators.

    Attributes
    ----------
    tol : float
        Target relative accuracy. Series are summed until terms fall below
        ``tol * 1e-4`` of the running sum, and a representation is rejected
        when cancellation would cost more than ``tol``.
    max_terms : int
        Hard cap on the number of terms in any single series.
    asymptotic_switch : float
        |z| above which the large-argument expansion is attempted.
    """

    tol: float = 1e-12
    max_terms: int = 10_000
    asymptotic_switch: float = 30.0

    def __post_init__(self):
        if not 0.0 < self.tol < 1.0:
            raise ValueError(f"tol must lie in (0, 1), got {self.tol}")
        if self.max_terms < 10:
            raise ValueError(f"max_terms must be >= 10, got {self.max_terms}")
        if not self.asymptotic_switch > 0.0:
            raise ValueError("asymptotic_switch must be positive")

    @property
    def stop(self) -> float:
        return self.tol * _TAIL

    @property
    def max_loss(self) -> float:
        """Largest tolerable ratio of biggest term to result."""
        return max(1.0, 0.1 * self.tol / _EPS)


DEFAULT_CONTROL = SeriesControl()


# ---------------------------------------------------------------------------
# Gamma and digamma
# ---------------------------------------------------------------------------

# B_2k / (2k (2k - 1)), k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
# B_2k / (2k), k = 1..7
_DIGAMMA_ASY = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def _needs_shift(w: complex) -> bool:
    return not (w.real >= 10.0 or (w.real > 0.0 and abs(w) >= 20.0))


def log_gamma(z: complex) -> complex:
    """log Γ(z) for complex z.

    The result is the analytic continuation from the positive real axis
    (branch cut along the negative real axis), so ``exp(log_gamma(z))``
    equals Γ(z) and ``log_gamma(z + 1) - log_gamma(z)`` equals ``log z``.

    Raises
    ------
    PoleError
        If z is 0, -1, -2, ...
    """
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"log_gamma has a pole at z = {z.real:g}")
    w = z
    shift = 0j
    while _needs_shift(w):
        shift += cmath.log(w)
        w += 1.0
    inv = 1.0 / w
    inv2 = inv * inv
    series = 0j
    power = inv
    for c in _STIRLING:
        series += c * power
        power *= inv2
    return (w - 0.5) * cmath.log(w) - w + _LOG_2PI_HALF + series - shift


def rgamma(z: complex) -> complex:
    """1/Γ(z), returning 0 at the poles of Γ."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        return 0j
    return cmath.exp(-log_gamma(z))


def digamma(z: complex) -> complex:
    """ψ(z) = Γ'(z)/Γ(z) by upward recurrence and the asymptotic series."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"digamma has a pole at z = {z.real:g}")
    w = z
    acc = 0j
    while _needs_shift(w):
        acc -= 1.0 / w
        w += 1.0
    inv2 = 1.0 / (w * w)
    series = 0j
    power = inv2
    for c in _DIGAMMA_ASY:
        series += c * power
        power *= inv2
    return acc + cmath.log(w) - 0.5 / w - series


# ---------------------------------------------------------------------------
# Kummer M
# ---------------------------------------------------------------------------


def _loss(biggest: float, total: complex) -> float:
    mag = abs(total)
    if mag == 0.0:
        return 0.0 if biggest == 0.0 else math.inf
    return biggest / mag


def _kummer_maclaurin(a, b, z, ctl):
    """Maclaurin sums of M and M' plus the worse of their cancellation ratios."""
    term = 1 + 0j
    val = 1 + 0j
    der = 0j
    big_val = 1.0
    big_der = 0.0
    stop = ctl.stop
    rz = abs(z)
    for n in range(ctl.max_terms):
        dterm = term * (a + n) / (b + n)
        der += dterm
        term = dterm * z / (n + 1)
        val += term
        big_val = max(big_val, abs(term))
        big_der = max(big_der, abs(dterm))
        if term == 0:
            break
        shrinking = abs(a + n + 1) * rz < abs(b + n + 1) * (n + 2)
        if shrinking and abs(term) <= stop * abs(val) and abs(dterm) <= stop * abs(der):
            break
    else:
        raise ConvergenceError("Maclaurin series of M did not converge", abs(val))
    return val, der, max(_loss(big_val, val), _loss(big_der, der))


def _asymptotic_sum(p, q, x, ctl):
    """Sum (p)_s (q)_s / s! * x**s while it is still converging.

    Returns the sum, or None when the terms start to grow again before the
    tolerance is reached (the expansion is not usable at this |x|).
    """
    term = 1 + 0j
    total = 1 + 0j
    biggest = 1.0
    prev = 1.0
    shrinking = False
    stop = ctl.stop
    for s in range(ctl.max_terms):
        term = term * (p + s) * (q + s) / (s + 1) * x
        mag = abs(term)
        total += term
        if mag == 0.0 or mag <= stop * abs(total):
            if biggest > ctl.max_loss * abs(total):
                return None
            return total
        if mag > biggest:
            biggest = mag
        if mag < prev:
            shrinking = True
        elif shrinking:
            return None
        prev = mag
    return None


def _kummer_asymptotic(a, b, z, ctl):
    """Two-sector large-|z| expansion of M(a, b, z), or None."""
    if _is_nonpositive_integer(b - a):
        first = 0j
    else:
        s1 = _asymptotic_sum(a, a - b + 1, -1.0 / z, ctl)
        if s1 is None:
            return None
        first = cmath.exp(log_gamma(b) - log_gamma(b - a) - a * cmath.log(-z)) * s1
    if _is_nonpositive_integer(a):
        second = 0j
    else:
        s2 = _asymptotic_sum(b - a, 1 - a, 1.0 / z, ctl)
        if s2 is None:
            return None
        second = cmath.exp(log_gamma(b) - log_gamma(a) + z + (a - b) * cmath.log(z)) * s2
    return first + second


def _taylor_step(a, b, z0, y0, dy0, h, ctl):
    """Advance (y, y') of the Kummer ODE from z0 to z0 + h by a Taylor series."""
    # e_n = c_n h^n with c_{n+2} from the ODE recurrence about z0.
    e0 = y0
    e1 = dy0 * h
    val = e0 + e1
    der = e1
    bz = b - z0
    hz = h / z0
    stop = ctl.stop
    for n in range(ctl.max_terms):
        e2 = (-(n + 1) * (n + bz) * e1 * hz + (n + a) * e0 * h * hz) / ((n + 1) * (n + 2))
        val += e2
        der += (n + 2) * e2
        # y' can be far smaller than y (small a), so each gets its own test
        if (
            n > 2
            and abs(e2) + abs(e1) <= stop * abs(val)
            and (n + 2) * abs(e2) + (n + 1) * abs(e1) <= stop * abs(der)
        ):
            return val, der / h
        e0, e1 = e1, e2
    raise ConvergenceError("Taylor continuation step did not converge", abs(val))


def _continue(a, b, z0, y0, dy0, z1, ctl):
    """Carry (y, y') along the segment z0 -> z1, which must avoid z = 0."""
    z = z0
    y, dy = y0, dy0
    while True:
        gap = z1 - z
        dist = abs(gap)
        if dist == 0.0:
            return y, dy
        hmax = min(_STEP_FRACTION * abs(z), _STEP_MAX)
        if dist <= hmax:
            h = gap
        else:
            h = gap * (hmax / dist)
        y, dy = _taylor_step(a, b, z, y, dy, h, ctl)
        z = z1 if h is gap else z + h


def _check_b(b: complex):
    if _is_nonpositive_integer(b):
        raise PoleError(f"M(a, b, z) is undefined for b = {b.real:g}")


def kummer_m_pair(a: complex, b: complex, z: complex, ctl: SeriesControl = DEFAULT_CONTROL):
    """Return ``(M(a, b, z), dM/dz)``."""
    a, b, z = complex(a), complex(b), complex(z)
    _check_b(b)
    if z == 0:
        return 1 + 0j, a / b
    r = abs(z)
    if r <= _MACLAURIN_RADIUS:
        val, der, loss = _kummer_maclaurin(a, b, z, ctl)
        if loss <= ctl.max_loss:
            return val, der
    if z.real < 0:
        # outward continuation is unstable here (the recessive solution is M);
        # M(a, b, z) = e^z M(b - a, b, -z) moves the work to Re z > 0
        # M' = (a/b) M(a + 1, b + 1, z) keeps the factor a exact for small a
        ez = cmath.exp(z)
        val = ez * kummer_m_pair(b - a, b, -z, ctl)[0]
        der = a / b * ez * kummer_m_pair(b - a, b + 1, -z, ctl)[0]
        return val, der
    if r >= ctl.asymptotic_switch:
        val = _kummer_asymptotic(a, b, z, ctl)
        if val is not None:
            der = _kummer_asymptotic(a + 1, b + 1, z, ctl)
            if der is not None:
                return val, a / b * der
    # Outward continuation from a circle where the Maclaurin sum is clean.
    r0 = min(r, 1.0)
    while True:
        z0 = z * (r0 / r)
        y0, dy0, loss = _kummer_maclaurin(a, b, z0, ctl)
        if loss <= ctl.max_loss or r0 < 1e-3:
            break
        r0 *= 0.5
    return _continue(a, b, z0, y0, dy0, z, ctl)


def kummer_m(a: complex, b: complex, z: complex, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """Kummer's confluent hypergeometric function M(a, b, z) = ₁F₁(a; b; z).

    Parameters
    ----------
    a, b, z : complex
        Parameters and argument; b must not be 0, -1, -2, ...
    ctl : SeriesControl, optional
        Accuracy and budget settings.

    Raises
    ------
    PoleError
        For b a non-positive integer.
    ConvergenceError
        If a series exhausts ``ctl.max_terms``.
    """
    return kummer_m_pair(a, b, z, ctl)[0]


def kummer_m_dz(a: complex, b: complex, z: complex, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """dM(a, b, z)/dz, equal to (a/b) M(a + 1, b + 1, z)."""
    return kummer_m_pair(a, b, z, ctl)[1]


# ---------------------------------------------------------------------------
# Tricomi U at b = 2
# ---------------------------------------------------------------------------


def _u_polynomial(m: int, z: complex):
    # U(-m, 2, z) = (-1)^m (m + 1)! M(-m, 2, z), a polynomial of degree m.
    coef = (-1) ** m * math.factorial(m + 1)
    val = 1 + 0j
    der = 0j
    zk = 1 + 0j
    ck = 1.0
    for k in range(m):
        ck = ck * (-m + k) / ((2 + k) * (k + 1))
        der += ck * (k + 1) * zk
        zk = zk * z
        val += ck * zk
    return coef * val, coef * der


def _u_logseries(a, z, ctl):
    """Logarithmic expansion of U(a, 2, z); returns (U, U', cancellation ratio)."""
    lead = rgamma(a) / z
    # 1/Γ(a-1) = (a-1)/Γ(a); forming a - 1 first would wipe out small a
    pref = (a - 1) * rgamma(a)
    logz = cmath.log(z)
    if pref == 0:
        return lead, -lead / z, 1.0
    # d_k = psi(a + k) - psi(1 + k) - psi(2 + k).  The -1/a inside psi(a) is
    # pulled out of the k = 0 term: pref / a = (a-1)/Γ(a+1), no overflow or cancellation.
    pole = -(a - 1) * rgamma(a + 1)
    d = digamma(a + 1) + 2.0 * 0.5772156649015329 - 1.0  # psi(1) = -gamma, psi(2) = 1 - gamma
    c = 1 + 0j  # (a)_k / ((2)_k k!) z^k
    s_val = 0j
    s_der = 0j  # sum of c_k z^(k-1) (k (L + d_k) + 1), times z
    big_val = 0.0
    big_der = 0.0
    stop = ctl.stop
    for k in range(ctl.max_terms):
        piece = c * (logz + d)
        s_val += piece
        dpiece = c * (k * (logz + d) + 1.0)
        s_der += dpiece
        mag = abs(piece)
        big_val = max(big_val, mag)
        big_der = max(big_der, abs(dpiece))
        if k > 2 and mag <= stop * abs(s_val) and abs(dpiece) <= stop * abs(s_der) and abs(a + k) * abs(z) < (k + 2) * (k + 1):
            break
        # advance to k + 1
        if k:
            d += 1.0 / (a + k)
        d -= 1.0 / (k + 1) + 1.0 / (k + 2)
        c = c * (a + k) / ((2 + k) * (k + 1)) * z
        if not cmath.isfinite(c):
            return math.nan, math.nan, math.inf
    else:
        raise ConvergenceError("logarithmic expansion of U did not converge", abs(s_val))
    val = lead + pref * s_val + pole
    der = -lead / z + pref * s_der / z
    apref = abs(pref)
    loss = max(
        _loss(max(abs(lead), apref * big_val, abs(pole)), val),
        _loss(max(abs(lead), apref * big_der) / abs(z), der),
    )
    return val, der, loss


def _u_asymptotic(a, b, z, ctl):
    s = _asymptotic_sum(a, a - b + 1, -1.0 / z, ctl)
    if s is None:
        return None
    return cmath.exp(-a * cmath.log(z)) * s


def _u_asymptotic_pair(a, z, ctl):
    val = _u_asymptotic(a, 2, z, ctl)
    if val is None:
        return None
    der = _u_asymptotic(a + 1, 3, z, ctl)
    if der is None:
        return None
    return val, -a * der


def _companion_growth(a, start, u_start, z, u_end, ctl):
    """Amplification of the second solution relative to U along a path.

    Two estimates are combined: the change in |M/U|, and the change in
    |W/U^2| with the Wronskian W ~ z^-2 e^z.  The second one still sees
    growth when M and U are nearly dependent (a close to a pole of Γ).
    """
    before = abs(kummer_m_pair(a, 2, start, ctl)[0]) / max(abs(u_start), 1e-300)
    after = abs(kummer_m_pair(a, 2, z, ctl)[0]) / max(abs(u_end), 1e-300)
    by_m = math.inf if before == 0.0 else after / before
    log_w = (z - start).real - 2.0 * math.log(abs(z) / abs(start))
    log_w -= 2.0 * (math.log(max(abs(u_end), 1e-300)) - math.log(max(abs(u_start), 1e-300)))
    by_w = math.exp(min(log_w, 700.0))
    return max(by_m, by_w, 1.0)


def _u_inward(a, z, ctl):
    """Continue U inward along the ray of z from where the expansion is clean.

    Returns ``(U, U', amplification)``.
    """
    r = abs(z)
    big_r = max(ctl.asymptotic_switch, 2.0 * r)
    for _ in range(40):
        start = z * (big_r / r)
        pair = _u_asymptotic_pair(a, start, ctl)
        if pair is not None:
            val, der = _continue(a, 2, start, pair[0], pair[1], z, ctl)
            return val, der, _companion_growth(a, start, pair[0], z, val, ctl)
        big_r *= 2.0
    raise ConvergenceError("no radius found where the U expansion converges", float("nan"))


def _u_outward(a, z, ctl):
    """Continue U outward from a small circle where the log expansion is clean."""
    r = abs(z)
    r0 = min(0.5 * r, 1.0)
    while True:
        start = z * (r0 / r)
        val, der, loss = _u_logseries(a, start, ctl)
        if loss <= ctl.max_loss or r0 < 1e-3:
            break
        r0 *= 0.5
    u0 = val
    val, der = _continue(a, 2, start, val, der, z, ctl)
    return val, der, loss * _companion_growth(a, start, u0, z, val, ctl)


def _u_connection(a, z, ctl):
    """U(a, 2, z) via M(a, 2, z) and U(2 - a, 2, -z); meant for Re z < 0.

    Returns ``(U, U', cancellation ratio)``.
    """
    if _is_nonpositive_integer(2 - a):
        return math.nan, math.nan, math.inf
    sgn = -1.0 if z.imag >= 0 else 1.0
    m_val, m_der = kummer_m_pair(a, 2, z, ctl)
    u_val, u_der, u_est = _u_select(2 - a, -z, ctl)
    ez = cmath.exp(z)
    coef = cmath.exp(sgn * 1j * math.pi * (2 - a)) * rgamma(a)
    pref = cmath.exp(log_gamma(2 - a) + sgn * 1j * math.pi * a)
    second = coef * ez * u_val
    val = pref * (m_val - second)
    der = pref * (m_der - coef * ez * (u_val - u_der))
    loss = max(_loss(abs(pref) * max(abs(m_val), abs(second)), val), 1.0)
    inherited = u_est * _loss(abs(pref * second), val)
    return val, der, max(loss, inherited)


def _u_select(a, z, ctl):
    """Best available ``(U, U', error estimate)`` over the evaluation routes."""
    if _is_nonpositive_integer(a):
        return (*_u_polynomial(int(-a.real), z), 1.0)
    if abs(z) >= ctl.asymptotic_switch:
        pair = _u_asymptotic_pair(a, z, ctl)
        if pair is not None:
            return (*pair, 1.0)
    best = _u_logseries(a, z, ctl)
    if best[2] <= ctl.max_loss:
        return best
    routes = (_u_outward, _u_connection) if z.real < 0 else (_u_inward, _u_outward)
    for route in routes:
        cand = route(a, z, ctl)
        if cand[2] < best[2]:
            best = cand
        if best[2] <= ctl.max_loss:
            break
    return best


def tricomi_u_pair(a: complex, z: complex, ctl: SeriesControl = DEFAULT_CONTROL):
    """Return ``(U(a, 2, z), dU/dz)``."""
    a, z = complex(a), complex(z)
    if z == 0:
        raise DomainError("U(a, 2, z) is singular at z = 0")
    val, der, _ = _u_select(a, z, ctl)
    return val, der


def tricomi_u_b2(a: complex, z: complex, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """Tricomi's confluent hypergeometric function U(a, 2, z).

    Uses the logarithmic expansion for integer second parameter; the generic
    Γ-ratio formula is singular at b = 2 and is never used. For a = 0, -1,
    -2, ... U reduces to a polynomial.

    Raises
    ------
    DomainError
        At z = 0.
    ConvergenceError
        If a series exhausts ``ctl.max_terms``.
    """
    return tricomi_u_pair(a, z, ctl)[0]


def tricomi_u_dz(a: complex, z: complex, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """dU(a, 2, z)/dz, equal to -a U(a + 1, 3, z)."""
    return tricomi_u_pair(a, z, ctl)[1]
