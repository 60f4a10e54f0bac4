"""
Derived fields: Gaussian curvature, radial stress, line profiles and grid samples.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ParameterError
from ..fem.element import reference_element
from ..fem.forms import bracket, cof
from ..fem.space import Field, evaluate_points
from ..models.report import Profile
from ..performance import track_performance

logger = logging.getLogger(__name__)

ProfileSource = Union[Field, Callable[[np.ndarray], np.ndarray]]

# P1 sub-triangles of a cubic cell, as local node indices (counterclockwise).
SUB_TRIANGLES = np.array([
    [0, 3, 8], [3, 4, 9], [4, 1, 5], [8, 9, 7], [9, 5, 6], [7, 6, 2],
    [3, 9, 8], [4, 5, 9], [9, 6, 7],
])


@dataclass
class CurvatureField:
    """[w,w] = 2 det ∇²w at the cell quadrature points, with its integrals."""
    cell_values: np.ndarray      # (T, q)
    integral: float
    absolute_integral: float

    @property
    def mean_ratio(self) -> float:
        """|∫[w,w]| / ∫|[w,w]| (0 for a flat plate)."""
        if self.absolute_integral == 0.0:
            return 0.0
        return abs(self.integral) / self.absolute_integral

    @property
    def has_both_signs(self) -> bool:
        scale = np.max(np.abs(self.cell_values)) if self.cell_values.size else 0.0
        tol = 1e-3 * scale
        return bool(np.any(self.cell_values > tol) and np.any(self.cell_values < -tol))

    def to_dict(self) -> Dict[str, float]:
        return {
            "integral": self.integral,
            "absolute_integral": self.absolute_integral,
            "mean_ratio": self.mean_ratio,
            "min": float(self.cell_values.min()) if self.cell_values.size else 0.0,
            "max": float(self.cell_values.max()) if self.cell_values.size else 0.0,
            "both_signs": self.has_both_signs,
        }


def gaussian_curvature_field(w: Field) -> CurvatureField:
    """Cellwise [w,w] (twice the Gaussian curvature) and its integral over Ω."""
    cells = w.dofmap.cell_tables()
    hess = np.einsum("tqmij,tm->tqij", cells.hess, w.local())
    values = bracket(hess, hess)
    return CurvatureField(
        cell_values=values,
        integral=float(np.sum(cells.weights * values)),
        absolute_integral=float(np.sum(cells.weights * np.abs(values))),
    )


def radial_unit_vectors(points: np.ndarray) -> np.ndarray:
    """e_r = ξ/|ξ|, and e₁ at the origin."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(points, axis=1)
    e_r = np.tile([1.0, 0.0], (len(points), 1))
    away = r > 1e-12
    e_r[away] = points[away] / r[away, None]
    return e_r


def radial_stress_from_hessian(points: np.ndarray, hess: np.ndarray) -> np.ndarray:
    """σ_rr = e_r · cof(∇²v) e_r."""
    e_r = radial_unit_vectors(points)
    return np.einsum("ni,nij,nj->n", e_r, cof(hess), e_r)


def radial_stress_field(v: Field, points, outside: str = "raise") -> np.ndarray:
    """σ_rr of the Airy function ``v`` at ``points`` (n, 2)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    _, _, hess = evaluate_points(v, points, derivatives=True, outside=outside)
    return radial_stress_from_hessian(points, hess)


def profile_abscissae(n_samples: int) -> np.ndarray:
    if n_samples < 2:
        raise ParameterError(f"a profile needs at least 2 samples, got {n_samples}")
    return np.linspace(-1.0, 1.0, n_samples)


def extract_profile(
    source: ProfileSource,
    axis: int = 0,
    n_samples: int = 401,
    normalize: bool = False,
    name: str = "",
) -> Profile:
    """
    Samples along ξ₂ = 0 (``axis`` = 0) or ξ₁ = 0 (``axis`` = 1).

    Points between the polygonal boundary and the unit circle read 0, the
    clamped boundary value. Normalization divides by the largest absolute
    sample; an all-zero profile is left as is and flagged.
    """
    if axis not in (0, 1):
        raise ParameterError(f"axis must be 0 or 1, got {axis}")
    s = profile_abscissae(n_samples)
    points = np.zeros((n_samples, 2))
    points[:, axis] = s
    if isinstance(source, Field):
        values = evaluate_points(source, points, outside="zero")
    else:
        values = np.asarray(source(points), dtype=float)
    profile = Profile(abscissae=s, values=np.asarray(values, dtype=float), name=name)
    if normalize:
        scale = profile.max_abs
        if scale == 0.0:
            profile.normalization_skipped = True
            logger.info("profile %r is identically zero, normalization skipped", name)
        else:
            profile = profile.scaled(1.0 / scale)
            profile.normalized = True
    return profile


def profile_deviation(profile: Profile, reference: Profile) -> float:
    """max |profile − reference| relative to max |reference|."""
    if len(profile.values) != len(reference.values):
        raise ParameterError("profiles are sampled differently")
    scale = reference.max_abs
    diff = float(np.max(np.abs(profile.values - reference.values)))
    return diff / scale if scale > 0 else diff


def self_similarity(profiles: Sequence[Profile], factors: Sequence[float]) -> float:
    """Largest deviation of ``profile_i / factor_i`` from the first scaled profile."""
    if len(profiles) != len(factors):
        raise ParameterError("one scale factor per profile is required")
    scaled = [p.scaled(1.0 / f) for p, f in zip(profiles, factors)]
    if len(scaled) < 2:
        return 0.0
    return max(profile_deviation(p, scaled[0]) for p in scaled[1:])


def disc_grid(resolution: int = 201) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Uniform grid on [-1, 1]²: coordinates (x, y) and the mask of points with |ξ| ≤ 1."""
    if resolution < 2:
        raise ParameterError(f"grid resolution must be at least 2, got {resolution}")
    axis = np.linspace(-1.0, 1.0, resolution)
    x, y = np.meshgrid(axis, axis, indexing="xy")
    inside = x ** 2 + y ** 2 <= 1.0
    return x, y, inside


@track_performance("post")
def heat_maps(v: Field, w: Field, resolution: int = 201) -> Dict[str, np.ndarray]:
    """σ_rr and [w,w] on the disc grid; NaN outside the disc."""
    x, y, inside = disc_grid(resolution)
    points = np.column_stack([x[inside], y[inside]])
    _, _, v_hess = evaluate_points(v, points, derivatives=True, outside="nan")
    _, _, w_hess = evaluate_points(w, points, derivatives=True, outside="nan")
    maps = {"x": x, "y": y}
    for name, values in (
        ("sigma_rr", radial_stress_from_hessian(points, v_hess)),
        ("ww", bracket(w_hess, w_hess)),
    ):
        grid = np.full(x.shape, np.nan)
        grid[inside] = values
        maps[name] = grid
    return maps


def nodal_derivatives(field: Field) -> Tuple[np.ndarray, np.ndarray]:
    """Hessians at every dof location, averaged over the cells sharing the node."""
    dofmap = field.dofmap
    _, _, hess_ref = reference_element().tabulate(reference_element().nodes)
    inv = dofmap.mesh.maps.inverse
    hess = np.einsum("tki,qmkl,tlj,tm->tqij", inv, hess_ref, inv, field.local(), optimize=True)
    dofs = dofmap.cell_dofs.ravel()
    counts = np.bincount(dofs, minlength=dofmap.n_dofs).astype(float)
    flat = hess.reshape(-1, 4)
    nodal = np.stack([np.bincount(dofs, weights=flat[:, k], minlength=dofmap.n_dofs) for k in range(4)], axis=1)
    return nodal.reshape(-1, 2, 2) / counts[:, None, None], counts


def subsampled_triangles(field_or_dofmap) -> np.ndarray:
    """Each cubic cell split into nine P1 triangles over its ten nodes."""
    dofmap = getattr(field_or_dofmap, "dofmap", field_or_dofmap)
    return dofmap.cell_dofs[:, SUB_TRIANGLES].reshape(-1, 3)
