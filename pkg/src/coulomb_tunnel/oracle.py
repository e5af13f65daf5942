"""Independent references for the fast path.

Two unrelated routes are provided:

* extended-precision evaluation (mpmath arithmetic, series summed here term
  by term) of M, U, the basis solutions, the current table and T;
* direct integration of the Schrodinger equation with the singular core
  replaced by a bounded potential of half-width delta.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Literal

import mpmath as mp
import numpy as np

from .errors import DomainError, IntegrationError, PrecisionError
from .wavefield import PhysParams, psi_l1, psi_l2, psi_r1, psi_r2

# ---------------------------------------------------------------------------
# extended precision special functions


@dataclass(frozen=True)
class PrecisionSpec:
    """Working precision of the reference evaluator.

    Parameters
    ----------
    digits : int
        Decimal digits of working precision, at least 30.
    max_terms : int
        Series cap.
    target : int
        Correct digits the result must keep after cancellation.
    adaptive : bool
        Raise the working precision on cancellation instead of failing.
    """

    digits: int = 30
    max_terms: int = 100_000
    target: int = 20
    adaptive: bool = True

    def __post_init__(self):
        if self.digits < 30:
            raise DomainError("reference precision must be at least 30 digits")
        if self.max_terms < 1 or self.target < 1:
            raise DomainError("max_terms and target must be positive")

    def with_digits(self, digits: int) -> "PrecisionSpec":
        return PrecisionSpec(max(30, digits), self.max_terms, self.target, self.adaptive)


DEFAULT_PRECISION = PrecisionSpec()


@dataclass(frozen=True)
class Reference:
    """A reference value with its a-posteriori error bound."""

    value: mp.mpc
    error_bound: mp.mpf
    digits: int

    def __complex__(self) -> complex:
        return complex(self.value)


def _adaptive(fn: Callable, prec: PrecisionSpec):
    """Run ``fn(prec)`` raising precision while cancellation is too strong."""
    while True:
        try:
            with mp.workdps(prec.digits):
                return fn(prec)
        except PrecisionError as exc:
            if not prec.adaptive or exc.digits_needed > 2000:
                raise
            prec = prec.with_digits(exc.digits_needed)


def _cancellation(biggest, total, n_terms, prec) -> mp.mpf:
    """Rounding bound; raises PrecisionError when too few digits survive."""
    if total == 0:
        return mp.mpf(0)
    lost = float(mp.log10(biggest / abs(total))) if biggest > 0 else 0.0
    if prec.digits - lost < prec.target:
        raise PrecisionError(
            f"series lost {lost:.1f} of {prec.digits} digits", int(math.ceil(lost + prec.target + 10))
        )
    return biggest * n_terms * mp.mpf(10) ** (-prec.digits)


def _m_series(a, b, z, prec):
    term = mp.mpc(1)
    total = mp.mpc(1)
    biggest = mp.mpf(1)
    eps = mp.mpf(10) ** (-prec.digits - 5)
    for n in range(prec.max_terms):
        ratio = (a + n) * z / ((b + n) * (n + 1))
        term *= ratio
        total += term
        mag = abs(term)
        biggest = max(biggest, mag)
        r = abs(ratio)
        if term == 0:
            return total, mp.mpf(0), biggest, n
        if n > abs(z) and r < 0.5:
            tail = mag * r / (1 - r)
            if tail <= eps * abs(total):
                return total, tail, biggest, n
    raise PrecisionError("defining series did not converge within max_terms", prec.digits)


def ref_kummer_m(a, b, z, prec: PrecisionSpec = DEFAULT_PRECISION) -> Reference:
    """M(a, b, z) by direct summation, via e^z M(b-a, b, -z) when Re z < 0."""

    def run(pr):
        aa, bb, zz = mp.mpc(a), mp.mpc(b), mp.mpc(z)
        if bb.imag == 0 and bb.real <= 0 and bb.real == int(bb.real):
            raise DomainError("b must not be a non-positive integer")
        if zz.real < 0:
            s, tail, big, n = _m_series(bb - aa, bb, -zz, pr)
            f = mp.exp(zz)
            s, tail, big = f * s, abs(f) * tail, abs(f) * big
        else:
            s, tail, big, n = _m_series(aa, bb, zz, pr)
        bound = tail + _cancellation(big, s, n + 1, pr)
        return Reference(s, bound, pr.digits)

    return _adaptive(run, prec)


def _is_nonpositive_int(a) -> bool:
    return a.imag == 0 and a.real <= 0 and a.real == int(a.real)


def _u_pair(a, z, prec):
    """U(a, 2, z) and dU/dz from the logarithmic integer-b expansion."""
    if _is_nonpositive_int(a):
        m = int(-a.real)
        coef = (-1) ** m * mp.factorial(m + 1)
        # polynomial: finite sums of the M series and of its derivative
        val = mp.mpc(1)
        der = mp.mpc(0)
        term = mp.mpc(1)
        for n in range(m):
            term *= (a + n) / ((2 + n) * (n + 1))
            val += term * z ** (n + 1)
            der += term * (n + 1) * z ** n
        return coef * val, coef * der, mp.mpf(0), abs(coef) * max(abs(val), 1), m + 1
    lead = mp.rgamma(a) / z
    pref = mp.rgamma(a - 1)
    logz = mp.log(z)
    d = mp.digamma(a) - mp.digamma(1) - mp.digamma(2)
    c = mp.mpc(1)
    zk = mp.mpc(1)
    val_sum = mp.mpc(0)
    der_sum = mp.mpc(0)
    biggest = abs(lead)
    eps = mp.mpf(10) ** (-prec.digits - 5)
    for k in range(prec.max_terms):
        piece = c * zk * (logz + d)
        val_sum += piece
        # d/dz of c z^k (log z + d) = c z^(k-1) (k (log z + d) + 1)
        der_sum += c * zk / z * (k * (logz + d) + 1)
        biggest = max(biggest, abs(pref * piece))
        ratio = (a + k) * z / ((2 + k) * (k + 1))
        d += 1 / (a + k) - 1 / mp.mpf(k + 1) - 1 / mp.mpf(k + 2)
        c *= (a + k) / ((2 + k) * (k + 1))
        zk *= z
        r = abs(ratio)
        if c == 0:
            break
        if k > abs(z) and r < 0.5:
            nxt = abs(c * zk * (logz + d))
            tail = 2 * nxt * r / (1 - r)
            if tail <= eps * abs(val_sum):
                break
    else:
        raise PrecisionError("logarithmic series did not converge within max_terms", prec.digits)
    val = lead + pref * val_sum
    der = -lead / z + pref * der_sum
    tail_bound = abs(pref) * 2 * abs(c * zk * (logz + d))
    return val, der, tail_bound, biggest, k + 1


def ref_tricomi_u_b2(a, z, prec: PrecisionSpec = DEFAULT_PRECISION) -> Reference:
    """U(a, 2, z) from the extended-precision logarithmic-case expansion."""
    return ref_tricomi_u_b2_pair(a, z, prec)[0]


def ref_tricomi_u_b2_pair(a, z, prec: PrecisionSpec = DEFAULT_PRECISION) -> tuple[Reference, Reference]:
    """U(a, 2, z) and its z-derivative."""

    def run(pr):
        aa, zz = mp.mpc(a), mp.mpc(z)
        if zz == 0:
            raise DomainError("U(a, 2, z) is singular at z = 0")
        val, der, tail, big, n = _u_pair(aa, zz, pr)
        bound_v = tail + _cancellation(big, val, n, pr)
        bound_d = tail * (1 + n / abs(zz)) + _cancellation(big * (1 + n / abs(zz)), der, n, pr)
        return Reference(val, bound_v, pr.digits), Reference(der, bound_d, pr.digits)

    return _adaptive(run, prec)


# ---------------------------------------------------------------------------
# extended precision scattering pipeline, straight from the printed formulas


def _digits_for(p: PhysParams, z: float, prec: PrecisionSpec) -> PrecisionSpec:
    # j22 cancels about 2 pi eta / ln 10 digits between psi_2 and its conjugate
    extra = 2.0 * math.pi * p.eta / math.log(10.0) + 2.0 * p.k * abs(z) / math.log(10.0)
    return prec.with_digits(max(prec.digits, int(prec.target + extra + 15)))


def _ref_basis_raw(p: PhysParams, z: float, pr: PrecisionSpec):
    k = mp.sqrt(mp.mpf(p.epsilon))
    eta = mp.mpf(p.u0) / (2 * k)
    a = mp.mpc(1, -eta)
    zz = mp.mpf(z)
    if zz > 0:
        w = 2j * k * zz
        env, denv, sign = mp.exp(-1j * k * zz), -1j * k, 1
        dw = 2j * k
    else:
        w = -2j * k * zz
        env, denv, sign = mp.exp(1j * k * zz), 1j * k, -1
        dw = -2j * k
    m = ref_kummer_m(a, 2, w, pr).value
    dm = a / 2 * ref_kummer_m(a + 1, 3, w, pr).value
    u, du = ref_tricomi_u_b2_pair(a, w, pr)
    out = []
    for f, df in ((m, dm), (u.value, du.value)):
        # sign * env * z * f(w); derivative by product and chain rule
        val = sign * env * zz * f
        der = sign * env * (denv * zz * f + f + zz * df * dw)
        out.append((val, der))
    return out


def ref_basis(p: PhysParams, z: float, prec: PrecisionSpec = DEFAULT_PRECISION):
    """Both basis solutions at ``z`` as ``[(psi_1, psi_1'), (psi_2, psi_2')]``."""
    if z == 0:
        raise DomainError("basis undefined at z = 0")
    pr = _digits_for(p, z, prec)
    with mp.workdps(pr.digits):
        return _ref_basis_raw(p, z, pr)


def _ref_bilinear(m, n):
    return 1j * (m[0] * mp.conj(n[1]) - m[1] * mp.conj(n[0]))


@dataclass(frozen=True)
class RefTable:
    jl: tuple
    jr: tuple
    digits: int


def ref_current_table(p: PhysParams, z_ref: float = 1.0, prec: PrecisionSpec = DEFAULT_PRECISION) -> RefTable:
    """Current bilinears formed directly from the complex basis values."""
    pr = _digits_for(p, z_ref, prec)
    with mp.workdps(pr.digits):
        tables = []
        for z in (-abs(z_ref), abs(z_ref)):
            b = _ref_basis_raw(p, z, pr)
            tables.append(tuple(tuple(_ref_bilinear(b[i], b[j]) for j in range(2)) for i in range(2)))
        return RefTable(tables[0], tables[1], pr.digits)


@dataclass(frozen=True)
class RefTunnel:
    T: mp.mpf
    R: mp.mpf
    a_r1: mp.mpc
    a_l1: mp.mpc
    table: RefTable


def ref_transmission(p: PhysParams, prec: PrecisionSpec = DEFAULT_PRECISION, z_ref: float = 1.0) -> RefTunnel:
    """T and R from the printed asymptotic waves in extended precision."""
    table = ref_current_table(p, z_ref, prec)
    with mp.workdps(table.digits):
        k = mp.sqrt(mp.mpf(p.epsilon))
        u0 = mp.mpf(p.u0)
        eta = u0 / (2 * k)
        s = mp.mpc(-1, eta)
        sbar = mp.mpc(-1, -eta)
        ik, mik = mp.mpc(0, k), mp.mpc(0, -k)
        a_r2 = mp.mpc(1)
        a_r1 = -(mp.power(ik, s) / mp.power(mik, s)) * mp.gamma(1 + 1j * eta) * a_r2
        jl = table.jl
        a_l1 = -a_r1 - jl[1][1] / jl[0][1].real * a_r2
        a_l2 = a_r2
        z_left, z_right = mp.mpf(-1), mp.mpf(1)
        c_inc = -mp.power(2, s) * (
            mp.power(ik, s) / mp.gamma(1 + 1j * eta) * a_l1
            + mp.exp(2j * mp.pi * s) * mp.power(mik, s) * a_l2
        ) * mp.power(1 / z_left, -1j * eta)
        c_tr = mp.power(2, sbar) * mp.power(ik, sbar) / mp.gamma(1 - 1j * eta) * a_r1
        c_tr *= mp.power(z_right, -1j * eta)
        c_refl = -(
            mp.power(2, sbar) * mp.exp(mp.pi * u0 / k) * mp.power(mik, sbar) / mp.gamma(1 - 1j * eta)
        ) * a_l1 * mp.power(1 / z_left, 1j * eta)
        inc = abs(c_inc) ** 2
        return RefTunnel(abs(c_tr) ** 2 / inc, abs(c_refl) ** 2 / inc, a_r1, a_l1, table)


def closed_form_transmission(p: PhysParams, digits: int = 30) -> mp.mpf:
    """cos^2 of the phase of Gamma(1 + i eta), the reduced form of T."""
    with mp.workdps(digits):
        eta = mp.mpf(p.u0) / (2 * mp.sqrt(mp.mpf(p.epsilon)))
        phase = mp.im(mp.loggamma(1 + 1j * eta))
        return mp.cos(phase) ** 2


# ---------------------------------------------------------------------------
# basis check against the equation itself


Basis = Literal["r1", "r2", "l1", "l2"]
_BASIS = {"r1": psi_r1, "r2": psi_r2, "l1": psi_l1, "l2": psi_l2}


def ode_residual(
    p: PhysParams,
    which_basis: Basis,
    z_grid,
    h: float = 1e-4,
    source: Literal["value", "deriv"] = "value",
) -> float:
    """Worst relative residual of psi'' + (eps - u0/|z|) psi.

    ``source="value"`` takes psi'' from a 3-point difference of the values.
    ``source="deriv"`` differentiates the analytic psi' instead (central
    difference, Richardson-extrapolated); its rounding error is far smaller,
    which matters near the nodes of psi.  The residual is measured against
    |psi''| + eps |psi| at each point.
    """
    fn = _BASIS[which_basis]
    worst = 0.0
    for z in np.asarray(z_grid, dtype=float):
        f0 = fn(p, z).value
        if source == "value":
            d2 = (fn(p, z + h).value - 2.0 * f0 + fn(p, z - h).value) / (h * h)
        elif source == "deriv":

            def central(step):
                return (fn(p, z + step).deriv - fn(p, z - step).deriv) / (2.0 * step)

            d2 = (4.0 * central(0.5 * h) - central(h)) / 3.0
        else:
            raise DomainError(f"unknown source {source!r}")
        res = d2 + (p.epsilon - p.u0 / abs(z)) * f0
        worst = max(worst, abs(res) / (abs(d2) + p.epsilon * abs(f0)))
    return worst


# ---------------------------------------------------------------------------
# regularised-core integration


@dataclass(frozen=True)
class BarrierParams:
    """Energy and strength for the integrator; unlike PhysParams u0 may be 0."""

    epsilon: float
    u0: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if not self.u0 >= 0:
            raise DomainError("u0 must be non-negative")


@dataclass(frozen=True)
class CutoffSpec:
    """Regularised potential and integration mesh.

    Parameters
    ----------
    delta : float
        Half-width of the bounded core.
    z_span : float
        Integration runs over [-z_span, z_span].
    step : float
        Largest step, used far from the core.  Near the core the step shrinks
        to max(|z|, delta)/20, so inside |z| < delta it is delta/20.
    shape : {"flat", "ramp"}
        ``flat``: u0/max(|z|, delta).  ``ramp``: (u0/delta)(2 - |z|/delta)
        inside the core, continuous with its first derivative at |z| = delta.
    """

    delta: float
    z_span: float = 400.0
    step: float = 0.005
    shape: Literal["flat", "ramp"] = "flat"

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError("delta must be positive")
        if not self.z_span > 10.0 * self.delta:
            raise DomainError("z_span must exceed 10 delta")
        if not self.step > 0:
            raise DomainError("step must be positive")
        if self.shape not in ("flat", "ramp"):
            raise DomainError(f"unknown cutoff shape {self.shape!r}")

    def potential(self, u0: float) -> Callable[[np.ndarray], np.ndarray]:
        d = self.delta
        if self.shape == "flat":
            return lambda z: u0 / np.maximum(np.abs(z), d)
        return lambda z: np.where(
            np.abs(z) < d, (u0 / d) * (2.0 - np.abs(z) / d), u0 / np.maximum(np.abs(z), d)
        )


@dataclass(frozen=True)
class IntegrationResult:
    T: float
    R: float
    flux_imbalance: float
    steps: int
    adequate: bool

    def __float__(self) -> float:
        return self.T


FLUX_TOL = 1e-6
ABORT_TOL = 1e-4


def _graded_nodes(z_span: float, step: float, core: float, breaks) -> np.ndarray:
    """Nodes on [0, z_span]: step core/20 below ``core``, geometric growth
    |z|/20 above, capped at ``step``."""
    fine = core / 20.0
    inner = np.arange(0.0, core, fine)
    nodes = [inner]
    z = core
    grow = []
    while z < z_span and z / 20.0 < step:
        grow.append(z)
        z *= 1.05
    nodes.append(np.asarray(grow))
    if z < z_span:
        n = int(math.ceil((z_span - z) / step))
        nodes.append(np.linspace(z, z_span, n + 1))
    else:
        nodes.append(np.array([z_span]))
    out = np.unique(np.concatenate(nodes + [np.asarray(breaks, dtype=float)]))
    return out[out <= z_span]


def _mesh(z_span: float, step: float, core: float, breaks=()) -> np.ndarray:
    right = _graded_nodes(z_span, step, core, breaks)
    return np.concatenate([-right[::-1], right[1:]])


def _transfer(zs: np.ndarray, q2: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """RK4 propagator from zs[0] to zs[-1] for y'' = -q2(z) y, as a 2x2 matrix."""
    h = np.diff(zs)[:, None, None]
    n = h.shape[0]

    def gen(z):
        a = np.zeros((n, 2, 2))
        a[:, 0, 1] = 1.0
        a[:, 1, 0] = -q2(z)
        return a

    hh = h[:, 0, 0]
    # end stages are pulled just inside the step so a jump sitting on a node
    # is seen from the correct side
    a0 = gen(zs[:-1] + 1e-9 * hh)
    am = gen(zs[:-1] + 0.5 * hh)
    a1 = gen(zs[1:] - 1e-9 * hh)
    eye = np.broadcast_to(np.eye(2), (n, 2, 2))
    k1 = a0
    k2 = am @ (eye + 0.5 * h * k1)
    k3 = am @ (eye + 0.5 * h * k2)
    k4 = a1 @ (eye + h * k3)
    mats = eye + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    # ordered product, later steps on the left
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            mats = np.concatenate([mats, np.eye(2)[None]], axis=0)
        mats = mats[1::2] @ mats[0::2]
    return mats[0]


def integrate_potential(
    epsilon: float,
    potential: Callable[[np.ndarray], np.ndarray],
    zs: np.ndarray,
) -> IntegrationResult:
    """Scatter a wave off ``potential`` on the mesh ``zs`` (increasing).

    A pure outgoing wave is placed at the right end and carried leftwards;
    at the left end it is split into local plane waves.

    Raises
    ------
    IntegrationError
        When the two ends disagree on the current by more than 1e-4.
    """
    zs = np.asarray(zs, dtype=float)
    q2 = lambda z: epsilon - potential(z)  # noqa: E731
    zl, zr = zs[0], zs[-1]
    ql2, qr2 = float(q2(np.array([zl]))[0]), float(q2(np.array([zr]))[0])
    if not (ql2 > 0 and qr2 > 0):
        raise IntegrationError("mesh ends are not in the classically allowed region")
    ql, qr = math.sqrt(ql2), math.sqrt(qr2)
    # propagate right -> left: invert the left -> right transfer matrix
    m = _transfer(zs, q2)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det
    psi_r = np.exp(1j * qr * zr)
    state = inv @ np.array([psi_r, 1j * qr * psi_r])
    psi, dpsi = state
    inc = 0.5 * (psi + dpsi / (1j * ql)) * np.exp(-1j * ql * zl)
    ref = 0.5 * (psi - dpsi / (1j * ql)) * np.exp(1j * ql * zl)
    j_right = 2.0 * qr
    j_left = 2.0 * float(np.imag(np.conj(psi) * dpsi))
    imbalance = abs(j_left - j_right) / j_right
    if imbalance > ABORT_TOL:
        raise IntegrationError(f"current not conserved by the integrator ({imbalance:.2e})")
    T = (qr / ql) / abs(inc) ** 2
    R = abs(ref) ** 2 / abs(inc) ** 2
    adequate = imbalance <= FLUX_TOL
    if not adequate:
        warnings.warn(
            f"step too coarse for eps={epsilon:g}: current imbalance {imbalance:.2e}",
            RuntimeWarning,
            stacklevel=2,
        )
    return IntegrationResult(float(T), float(R), float(imbalance), len(zs) - 1, adequate)


def integrate_cutoff(p: PhysParams | BarrierParams, cut: CutoffSpec) -> IntegrationResult:
    """Transmission through u0/|z| with its core cut off at ``cut.delta``."""
    k = math.sqrt(p.epsilon)
    if not cut.step < 0.1 / k:
        raise IntegrationError(f"step {cut.step:g} does not resolve the wavelength at eps={p.epsilon:g}")
    if not cut.z_span * k > 10.0:
        raise IntegrationError("z_span must span many wavelengths")
    if not p.epsilon > p.u0 / cut.z_span:
        raise IntegrationError("mesh ends lie inside the barrier")
    breaks = [cut.delta] + ([p.u0 / p.epsilon] if p.u0 > 0 else [])
    zs = _mesh(cut.z_span, cut.step, cut.delta, breaks)
    return integrate_potential(p.epsilon, cut.potential(p.u0), zs)


def square_barrier(epsilon: float, height: float, half_width: float, z_span: float = 20.0, step: float = 1e-3):
    """Integrated and closed-form T for a square barrier; integrator validation."""
    zs = np.unique(np.concatenate([np.arange(-z_span, z_span + step / 2, step), [-half_width, half_width]]))
    pot = lambda z: np.where(np.abs(z) < half_width, height, 0.0)  # noqa: E731
    num = integrate_potential(epsilon, pot, zs)
    width = 2.0 * half_width
    if epsilon < height:
        kap = math.sqrt(height - epsilon)
        exact = 1.0 / (1.0 + height**2 * math.sinh(kap * width) ** 2 / (4.0 * epsilon * (height - epsilon)))
    elif epsilon > height:
        q = math.sqrt(epsilon - height)
        exact = 1.0 / (1.0 + height**2 * math.sin(q * width) ** 2 / (4.0 * epsilon * (epsilon - height)))
    else:
        exact = 1.0 / (1.0 + epsilon * width**2 / 4.0)
    return num, exact
