"""
Data Models - Core records of the plate solver.

Defines:
- Problem models (parameters, formulation variant, disclinations)
- Result models (energies, errors, profiles, solver reports)
- Run models (experiment kinds, solver and run configuration)
"""

from .problem import (
    CHARACTERISTIC_ANGLES, DisclinationSet, FormulationVariant, PlateProblem, uniform_load,
)
from .report import EnergyBreakdown, EnergyErrors, Profile, SolverReport
from .run import EXPERIMENT_DEFAULTS, ExperimentKind, RunConfig, SolverConfig

__all__ = [
    "CHARACTERISTIC_ANGLES", "DisclinationSet", "FormulationVariant", "PlateProblem", "uniform_load",
    "EnergyBreakdown", "EnergyErrors", "Profile", "SolverReport",
    "EXPERIMENT_DEFAULTS", "ExperimentKind", "RunConfig", "SolverConfig",
]
