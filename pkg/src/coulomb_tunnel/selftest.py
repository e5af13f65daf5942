"""Invariant suite behind ``coulomb-tunnel selftest``."""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass
from typing import Callable

from . import cfun, oracle
from .flux import current_table
from .scatter import transmission
from .wavefield import PhysParams


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    limit: float

    @property
    def passed(self) -> bool:
        return self.worst <= self.limit


def _rel(x: complex, y: complex) -> float:
    return abs(x - y) / max(abs(y), 1e-300)


def _scattering_points(rng: random.Random, n: int):
    for _ in range(n):
        y = math.exp(rng.uniform(math.log(0.05), math.log(50.0)))
        t = math.exp(rng.uniform(math.log(0.01), math.log(100.0)))
        yield complex(1.0, -y), complex(0.0, t)


def _phys_points(rng: random.Random, n: int):
    for _ in range(n):
        eps = math.exp(rng.uniform(math.log(0.05), math.log(50.0)))
        u0 = math.exp(rng.uniform(math.log(0.2), math.log(5.0)))
        yield PhysParams(eps, u0)


def check_log_gamma(rng):
    worst = 0.0
    for _ in range(50):
        z = complex(rng.uniform(-10, 10), rng.uniform(-10, 10))
        if abs(z - round(z.real)) < 1e-3:
            continue
        ratio = cmath.exp(cfun.log_gamma(z + 1) - cfun.log_gamma(z))
        worst = max(worst, _rel(ratio, z))
    return worst


def check_kummer_transformation(rng):
    worst = 0.0
    for _ in range(40):
        a = cmath.rect(rng.uniform(0, 5), rng.uniform(-math.pi, math.pi))
        z = cmath.rect(rng.uniform(0, 20), rng.uniform(-math.pi, math.pi))
        lhs = cfun.kummer_m(a, 2, z)
        rhs = cmath.exp(z) * cfun.kummer_m(2 - a, 2, -z)
        worst = max(worst, _rel(lhs, rhs))
    return worst


def check_m_ode(rng):
    worst = 0.0
    for _ in range(40):
        a = cmath.rect(rng.uniform(0, 5), rng.uniform(-math.pi, math.pi))
        z = cmath.rect(rng.uniform(0.1, 20), rng.uniform(-math.pi, math.pi))
        y, dy = cfun.kummer_m_pair(a, 2, z)
        d2 = a / 2 * cfun.kummer_m_dz(a + 1, 3, z)
        terms = (z * d2, (2 - z) * dy, -a * y)
        worst = max(worst, abs(sum(terms)) / sum(abs(t) for t in terms))
    return worst


def second_derivative_u(a: complex, z: complex) -> complex:
    """U'' from central differences of U', Richardson-extrapolated (O(h^4))."""
    h = 1e-3 * abs(z)

    def central(step):
        return (cfun.tricomi_u_dz(a, z + step) - cfun.tricomi_u_dz(a, z - step)) / (2 * step)

    return (4 * central(h / 2) - central(h)) / 3


def check_u_ode(rng):
    worst = 0.0
    for _ in range(40):
        a = cmath.rect(rng.uniform(0, 3), rng.uniform(-math.pi, math.pi))
        z = cmath.rect(rng.uniform(0.1, 20), rng.uniform(-math.pi, math.pi))
        y, dy = cfun.tricomi_u_pair(a, z)
        d2 = second_derivative_u(a, z)
        terms = (z * d2, (2 - z) * dy, -a * y)
        worst = max(worst, abs(sum(terms)) / sum(abs(t) for t in terms))
    return worst


def check_oracle_agreement(rng):
    worst = 0.0
    for a, z in _scattering_points(rng, 15):
        worst = max(worst, _rel(cfun.kummer_m(a, 2, z), complex(oracle.ref_kummer_m(a, 2, z))))
        worst = max(worst, _rel(cfun.tricomi_u_b2(a, z), complex(oracle.ref_tricomi_u_b2(a, z))))
    return worst


def check_current_identities(rng):
    worst = 0.0
    for p in _phys_points(rng, 6):
        table = current_table(p, 1.0, cross_check=(0.3, 3.0))
        worst = max(worst, *table.diagnostics.values())
    return worst


def check_flux_conservation(rng):
    worst = 0.0
    for _ in range(20):
        eps = 10 ** rng.uniform(-3, 2)
        u0 = rng.choice((0.3, 1.0, 3.0))
        r = transmission(PhysParams(eps, u0))
        worst = max(worst, r.diagnostics.get("flux_imbalance", math.inf))
    return worst


def check_closed_form(rng):
    worst = 0.0
    for p in _phys_points(rng, 10):
        r = transmission(p)
        worst = max(worst, abs(r.T - float(oracle.closed_form_transmission(p))))
    return worst


CHECKS: tuple[tuple[str, Callable, float], ...] = (
    ("log_gamma recurrence", check_log_gamma, 1e-12),
    ("Kummer transformation", check_kummer_transformation, 1e-10),
    ("M ODE residual", check_m_ode, 1e-8),
    ("U ODE residual", check_u_ode, 1e-8),
    ("oracle agreement (M, U)", check_oracle_agreement, 1e-11),
    ("current identities", check_current_identities, 1e-8),
    ("T + R = 1", check_flux_conservation, 1e-9),
    ("T vs cos^2 arg Gamma", check_closed_form, 1e-9),
)


def run_selftest(tolerance: float | None = None, seed: int = 20240601) -> list[CheckResult]:
    """Run every check; ``tolerance`` replaces all limits when given."""
    out = []
    for name, fn, limit in CHECKS:
        rng = random.Random(f"{seed}:{name}")
        try:
            worst = float(fn(rng))
        except Exception:  # a crash is a failed check, not a crashed report
            worst = math.inf
        out.append(CheckResult(name, worst, limit if tolerance is None else tolerance))
    return out
