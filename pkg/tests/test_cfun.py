import cmath
import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulomb_tunnel import cfun
from coulomb_tunnel.errors import ConvergenceError, DomainError, PoleError
from coulomb_tunnel.oracle import ref_kummer_m, ref_tricomi_u_b2

# frozen from the extended-precision reference (oracle.ref_*)
M_REF = 0.7409913687105696 + 1.1540256815324499j  # M(1 - 0.5i, 2, 2i)
U_REF = 0.10157219054422288 - 0.2794211811600459j  # U(1 - 0.5i, 2, 2i)


def rel(x, y):
    return abs(x - y) / abs(y)


def polar(max_r, min_r=0.0):
    # subnormal radii are excluded: a/2 already underflows there
    return st.builds(
        cmath.rect, st.floats(min_r, max_r, allow_subnormal=False), st.floats(-math.pi, math.pi)
    )


# --- log_gamma ---------------------------------------------------------------


def test_log_gamma_at_one():
    assert abs(cfun.log_gamma(1)) < 1e-15


def test_log_gamma_half():
    assert cfun.log_gamma(0.5).real == pytest.approx(0.5723649429247001, rel=1e-14)


def test_log_gamma_imaginary_modulus():
    y = 0.75
    g2 = abs(cmath.exp(cfun.log_gamma(1 + 1j * y))) ** 2
    assert g2 == pytest.approx(math.pi * y / math.sinh(math.pi * y), rel=1e-13)


@pytest.mark.parametrize("z", [0, -1, -7])
def test_log_gamma_poles(z):
    with pytest.raises(PoleError):
        cfun.log_gamma(z)


def test_log_gamma_principal_branch_against_mpmath():
    for z in (0.3 + 40j, -4.5 + 0.1j, 12 - 3j, 0.01 - 0.01j, -20.5 - 7j):
        assert abs(cfun.log_gamma(z) - complex(mp.loggamma(z))) < 1e-12 * max(1, abs(complex(mp.loggamma(z))))


@settings(max_examples=200, deadline=None)
@given(st.complex_numbers(max_magnitude=30, allow_nan=False, allow_infinity=False))
def test_log_gamma_recurrence(z):
    if abs(z - round(z.real)) < 1e-3:
        return
    ratio = cmath.exp(cfun.log_gamma(z + 1) - cfun.log_gamma(z))
    assert rel(ratio, z) < 1e-12


def test_rgamma_zero_at_poles():
    assert cfun.rgamma(-3) == 0


def test_digamma_matches_mpmath():
    for z in (1, 0.5 + 2j, -3.5 + 0.5j, 30 - 2j):
        assert rel(cfun.digamma(z), complex(mp.digamma(z))) < 1e-13


# --- kummer M ----------------------------------------------------------------


def test_kummer_m_at_zero():
    assert cfun.kummer_m(3 - 2j, 2, 0) == 1


def test_kummer_m_closed_form():
    assert cfun.kummer_m(1, 2, 1) == pytest.approx(math.e - 1, rel=1e-15)


def test_kummer_m_frozen_reference():
    assert rel(cfun.kummer_m(1 - 0.5j, 2, 2j), M_REF) < 1e-13


def test_kummer_m_dz_at_zero():
    assert cfun.kummer_m_dz(3 - 2j, 2, 0) == (3 - 2j) / 2


def test_kummer_m_dz_rule():
    assert rel(cfun.kummer_m_dz(1, 2, 1), 0.5 * cfun.kummer_m(2, 3, 1)) < 1e-14


def test_kummer_m_dz_finite_difference():
    a, z, h = 1 - 0.5j, 2j, 1e-5
    fd = (cfun.kummer_m(a, 2, z + h) - cfun.kummer_m(a, 2, z - h)) / (2 * h)
    assert rel(cfun.kummer_m_dz(a, 2, z), fd) < 1e-6


def test_kummer_m_bad_b():
    with pytest.raises(PoleError):
        cfun.kummer_m(1, -2, 1)


def test_kummer_m_exhausted_budget_reports_partial_sum():
    ctl = cfun.SeriesControl(max_terms=10, asymptotic_switch=1e9)
    with pytest.raises(ConvergenceError) as info:
        cfun.kummer_m(1 - 0.5j, 2, 1.5j, ctl)
    assert "partial sum" in str(info.value)
    assert math.isfinite(info.value.partial_sum)


def test_series_control_validation():
    with pytest.raises(ValueError):
        cfun.SeriesControl(tol=0)
    with pytest.raises(ValueError):
        cfun.SeriesControl(max_terms=0)


@settings(max_examples=150, deadline=None)
@given(polar(5.0), polar(20.0))
def test_kummer_transformation(a, z):
    lhs = cfun.kummer_m(a, 2, z)
    rhs = cmath.exp(z) * cfun.kummer_m(2 - a, 2, -z)
    assert rel(lhs, rhs) < 1e-10


@settings(max_examples=150, deadline=None)
@given(polar(5.0), polar(20.0, 0.1))
def test_kummer_ode_residual(a, z):
    y, dy = cfun.kummer_m_pair(a, 2, z)
    d2 = a / 2 * cfun.kummer_m_dz(a + 1, 3, z)
    terms = (z * d2, (2 - z) * dy, -a * y)
    assert abs(sum(terms)) <= 1e-8 * sum(abs(t) for t in terms)


def test_kummer_large_argument_branch():
    # the asymptotic branch and its derivative against the reference
    for a, z in ((1 - 3j, 45j), (1 - 20j, 80j), (2.5 + 1j, -60 + 5j)):
        ref = complex(ref_kummer_m(a, 2, z))
        assert rel(cfun.kummer_m(a, 2, z), ref) < 1e-11


# --- tricomi U, b = 2 -----------------------------------------------------


def test_tricomi_u_one():
    assert cfun.tricomi_u_b2(1, 2) == pytest.approx(0.5, rel=1e-15)


@pytest.mark.parametrize("z", [0.3, 2j, -4 + 1j, 50])
def test_tricomi_u_zero_parameter(z):
    assert cfun.tricomi_u_b2(0, z) == 1


def test_tricomi_u_frozen_reference():
    assert rel(cfun.tricomi_u_b2(1 - 0.5j, 2j), U_REF) < 1e-13


def test_tricomi_u_polynomial_case():
    # U(-m, 2, z) = (-1)^m (m+1)! M(-m, 2, z)
    for m in (1, 2, 5):
        for z in (0.7, -3 + 2j, 15j):
            assert rel(cfun.tricomi_u_b2(-m, z), (-1) ** m * math.factorial(m + 1) * cfun.kummer_m(-m, 2, z)) < 1e-13


def test_tricomi_u_singular_at_zero():
    with pytest.raises(DomainError):
        cfun.tricomi_u_b2(1 - 0.5j, 0)


def test_tricomi_u_dz_examples():
    assert cfun.tricomi_u_dz(1, 2) == pytest.approx(-0.25, rel=1e-15)
    assert cfun.tricomi_u_dz(0, 3 + 1j) == 0


def test_tricomi_u_dz_finite_difference():
    a, z, h = 1 - 0.5j, 0.5j, 1e-6
    fd = (cfun.tricomi_u_b2(a, z + h) - cfun.tricomi_u_b2(a, z - h)) / (2 * h)
    assert rel(cfun.tricomi_u_dz(a, z), fd) < 1e-7


def test_tricomi_u_logarithmic_behaviour_near_zero():
    # U - 1/(Gamma(a) z) grows like log z / Gamma(a - 1); U' like -1/(Gamma(a) z^2)
    a = 1 - 0.5j
    ga, ga1 = cmath.exp(cfun.log_gamma(a)), cmath.exp(cfun.log_gamma(a - 1))
    z1, z2 = 1e-5j, 1e-7j
    rem1 = cfun.tricomi_u_b2(a, z1) - 1 / (ga * z1)
    rem2 = cfun.tricomi_u_b2(a, z2) - 1 / (ga * z2)
    slope = (rem1 - rem2) / (cmath.log(z1) - cmath.log(z2))
    assert rel(slope, 1 / ga1) < 1e-4
    for z in (z1, z2):
        assert rel(cfun.tricomi_u_dz(a, z) * z * z, -1 / ga) < 1e-3


@pytest.mark.parametrize("a", [1e-8, 1e-20, 1e-300, -2 + 1e-9, 1e-8j])
def test_tricomi_u_small_parameter(a):
    # U = 1 + O(a) comes out of a pole term that is factored analytically
    for z in (1.0, -18.0, 3j, 10 - 5j):
        with mp.workdps(40):
            ref = complex(mp.hyperu(a, 2, z))
            dref = complex(-mp.mpc(a) * mp.hyperu(a + 1, 3, z))
        u, du = cfun.tricomi_u_pair(a, z)
        assert rel(u, ref) < 1e-13
        assert abs(du - dref) < 1e-13 * max(abs(dref), abs(a))


@pytest.mark.parametrize("a", [1e-8, 1e-20, 0.3 - 2j])
@pytest.mark.parametrize("z", [3.0, -18.0, 3j, 10 - 5j, -25 + 1j])
def test_kummer_m_derivative_small_parameter(a, z):
    # M' carries the factor a; it must not be truncated against M itself
    with mp.workdps(40):
        ref = complex(mp.hyp1f1(a, 2, z))
        dref = complex(mp.mpc(a) / 2 * mp.hyp1f1(a + 1, 3, z))
    m, dm = cfun.kummer_m_pair(a, 2, z)
    assert rel(m, ref) < 1e-12
    assert rel(dm, dref) < 1e-12


def test_kummer_m_negative_real_axis():
    assert rel(cfun.kummer_m(2, 2, -18), math.exp(-18)) < 1e-14


def test_tricomi_u_large_imaginary_argument():
    for a in (1 - 0.5j, 1 - 3j, 0.3 + 2j):
        for t in (1e3, -1e3):
            z = complex(0, t)
            assert abs(abs(cfun.tricomi_u_b2(a, z) * cmath.exp(a * cmath.log(z))) - 1) < 0.01


def _u_second_derivative(a, z):
    h = 1e-3 * abs(z)

    def central(step):
        return (cfun.tricomi_u_dz(a, z + step) - cfun.tricomi_u_dz(a, z - step)) / (2 * step)

    return (4 * central(h / 2) - central(h)) / 3


@settings(max_examples=100, deadline=None)
@given(polar(3.0), polar(20.0, 0.1))
def test_tricomi_ode_residual(a, z):
    y, dy = cfun.tricomi_u_pair(a, z)
    d2 = _u_second_derivative(a, z)
    terms = (z * d2, (2 - z) * dy, -a * y)
    assert abs(sum(terms)) <= 1e-8 * sum(abs(t) for t in terms)


@settings(max_examples=60, deadline=None)
@given(st.floats(math.log(0.05), math.log(50.0)), st.floats(math.log(0.01), math.log(100.0)))
def test_scattering_regime_against_reference(log_y, log_t):
    a, z = complex(1, -math.exp(log_y)), complex(0, math.exp(log_t))
    assert rel(cfun.kummer_m(a, 2, z), complex(ref_kummer_m(a, 2, z))) < 1e-11
    assert rel(cfun.tricomi_u_b2(a, z), complex(ref_tricomi_u_b2(a, z))) < 1e-11


def test_general_parameters_against_mpmath():
    # third-party check away from the scattering line
    samples = [(2.5 - 1j, -3 + 4j), (-1.7 + 0.4j, 6 - 2j), (0.5 + 2.5j, -10 - 1j), (3 + 0j, 0.2 + 0.1j)]
    with mp.workdps(40):
        for a, z in samples:
            assert rel(cfun.tricomi_u_b2(a, z), complex(mp.hyperu(a, 2, z))) < 1e-11
            assert rel(cfun.kummer_m(a, 2, z), complex(mp.hyp1f1(a, 2, z))) < 1e-12
