"""
Analytic - closed-form reference solutions, Kirchhoff-Love energies and
disclination presets.
"""

from .exact import (
    ExactSolution, bracket_test_functions, c_nu_of, green_disc, kl_bending_energy, kl_bending_solution,
    kl_membrane_energy, kl_membrane_solution, manufactured_defects,
    radial_bracket, radial_laplacian, test1_exact, test1_profiles, test2_exact,
)
from .presets import PRESET_SITES, get_preset, multi_disclination_presets, preset_by_name, single_disclination

__all__ = [
    "ExactSolution", "bracket_test_functions", "c_nu_of", "green_disc", "kl_bending_energy", "kl_bending_solution",
    "kl_membrane_energy", "kl_membrane_solution", "manufactured_defects",
    "radial_bracket", "radial_laplacian", "test1_exact", "test1_profiles", "test2_exact",
    "PRESET_SITES", "get_preset", "multi_disclination_presets", "preset_by_name", "single_disclination",
]
