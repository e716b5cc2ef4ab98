"""Numerical laboratory for a coupled generalized NLS system: direct
scattering, reflectionless Riemann-Hilbert solitons, the parabolic-cylinder
local model, and long-time soliton-resolution predictions cross-checked
against a spectral PDE solver."""

__version__ = "0.1.0"

from .core import (
    ConeSpec,
    EquationParams,
    FieldState,
    PhaseContext,
    SpatialGrid,
    cone_interval,
    partition_spectrum,
    phase_point,
    theta,
)
from .pde import SolverConfig, Stepper, evolve, rhs, step
from .scattering import ScatteringData, find_discrete_spectrum, norming_constant
from .soliton import SolitonData, make_initial_data, nsoliton, one_soliton

__all__ = [
    "ConeSpec",
    "EquationParams",
    "FieldState",
    "PhaseContext",
    "ScatteringData",
    "SolitonData",
    "SolverConfig",
    "SpatialGrid",
    "Stepper",
    "cone_interval",
    "evolve",
    "find_discrete_spectrum",
    "make_initial_data",
    "norming_constant",
    "nsoliton",
    "one_soliton",
    "partition_spectrum",
    "phase_point",
    "rhs",
    "step",
    "theta",
    "__version__",
]
