"""Transmission through the one-dimensional Coulomb barrier u0/|z|.

The singular point is kept: the wave function is matched through z = 0 by
equal irregular amplitudes and continuity of the probability current.
"""

from .errors import (
    ConvergenceError,
    CoulombTunnelError,
    DegenerateTableError,
    DomainError,
    IntegrationError,
    InvariantError,
    NearSingularityError,
    PoleError,
    PrecisionError,
    RealityError,
)
from .flux import CurrentTable, bilinear, current_table, total_current
from .scatter import (
    AmplitudeSet,
    Census,
    EnergyGrid,
    ScanRow,
    TunnelResult,
    oscillation_census,
    scan,
    solve,
    transmission,
)
from .wavefield import PhysParams, WaveSample

__version__ = "0.1.0"

__all__ = [
    "AmplitudeSet",
    "Census",
    "ConvergenceError",
    "CoulombTunnelError",
    "CurrentTable",
    "DegenerateTableError",
    "DomainError",
    "EnergyGrid",
    "IntegrationError",
    "InvariantError",
    "NearSingularityError",
    "PhysParams",
    "PoleError",
    "PrecisionError",
    "RealityError",
    "ScanRow",
    "TunnelResult",
    "WaveSample",
    "bilinear",
    "current_table",
    "oscillation_census",
    "scan",
    "solve",
    "total_current",
    "transmission",
]
