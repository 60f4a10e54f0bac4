"""
Finite elements - meshes, the cubic Lagrange element, the constrained
space V(T) and the DG forms of the coupled plate system.
"""

from .element import (
    AffineMap, P3ReferenceElement, QuadratureRule,
    cell_quadrature, edge_quadrature, eval_basis, physical_derivatives, reference_element,
)
from .forms import (
    AssembledSystem, assemble_biharmonic_dg, assemble_dirac_load, assemble_jacobian,
    assemble_pressure_load, assemble_residual, assemble_system, bracket, cof,
    evaluate_functional, system_statistics,
)
from .mesh import (
    EdgeGeometry, Mesh, classify_edges, edge_geometry, export_msh, generate_disc_mesh, import_msh,
)
from .space import (
    DofMap, Field, PlateState, PointLocation, build_dofmap, evaluate, evaluate_points,
    interpolate, locate_point, locate_points,
)

__all__ = [
    "AffineMap", "P3ReferenceElement", "QuadratureRule",
    "cell_quadrature", "edge_quadrature", "eval_basis", "physical_derivatives", "reference_element",
    "AssembledSystem", "assemble_biharmonic_dg", "assemble_dirac_load", "assemble_jacobian",
    "assemble_pressure_load", "assemble_residual", "assemble_system", "bracket", "cof",
    "evaluate_functional", "system_statistics",
    "EdgeGeometry", "Mesh", "classify_edges", "edge_geometry", "export_msh", "generate_disc_mesh", "import_msh",
    "DofMap", "Field", "PlateState", "PointLocation", "build_dofmap", "evaluate", "evaluate_points",
    "interpolate", "locate_point", "locate_points",
]
