"""
Post-processing - energies, error percentages, derived fields, profiles
and CSV/VTK export.
"""

from .energies import (
    ENERGY_TERMS, bracket_identity_integrals, compute_energies, coupling_energy_bracket, energy_errors,
    hessian_energy, percentage_error,
)
from .export import (
    format_number, write_csv, write_grid_csv, write_json, write_profiles_csv,
    write_records_csv, write_vtk,
)
from .fields import (
    SUB_TRIANGLES, CurvatureField, disc_grid, extract_profile, gaussian_curvature_field,
    heat_maps, nodal_derivatives, profile_deviation, radial_stress_field,
    radial_stress_from_hessian, radial_unit_vectors, self_similarity, subsampled_triangles,
)

__all__ = [
    "ENERGY_TERMS", "bracket_identity_integrals", "compute_energies", "coupling_energy_bracket", "energy_errors",
    "hessian_energy", "percentage_error",
    "format_number", "write_csv", "write_grid_csv", "write_json", "write_profiles_csv",
    "write_records_csv", "write_vtk",
    "SUB_TRIANGLES", "CurvatureField", "disc_grid", "extract_profile", "gaussian_curvature_field",
    "heat_maps", "nodal_derivatives", "profile_deviation", "radial_stress_field",
    "radial_stress_from_hessian", "radial_unit_vectors", "self_similarity", "subsampled_triangles",
]
