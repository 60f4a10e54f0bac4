"""
Error types raised by the plate solver.

Solver non-convergence is not an error: it is reported through
``SolverReport`` so sweeps can keep going.
"""

from typing import Optional


class PlateError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(PlateError, ValueError):
    """A parameter is outside its admissible range."""


class MeshParseError(PlateError):
    """A mesh file is malformed or uses unsupported elements."""


class GeometryError(PlateError):
    """Degenerate geometry, e.g. an affine map with non-positive determinant."""


class LocationError(PlateError):
    """A point does not lie inside the triangulated domain."""

    def __init__(self, point, message: Optional[str] = None):
        self.point = tuple(float(c) for c in point)
        super().__init__(message or f"point {self.point} is outside the mesh")


class LinearAlgebraError(PlateError):
    """Singular factorization."""

    def __init__(self, message: str, pivot: Optional[int] = None):
        self.pivot = pivot
        if pivot is not None:
            message = f"{message} (pivot {pivot})"
        super().__init__(message)


class ConfigError(PlateError):
    """Invalid run file or command line."""
