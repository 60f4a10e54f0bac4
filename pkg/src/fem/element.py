"""
Cubic Lagrange reference triangle, quadrature rules and affine maps.

Reference triangle: (0,0), (1,0), (0,1). Node order: the three vertices,
two nodes per edge at thirds along local edges (0,1), (1,2), (2,0) in the
direction of the edge, then the centroid.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from ..errors import GeometryError

REFERENCE_NODES = np.array([
    [0.0, 0.0], [1.0, 0.0], [0.0, 1.0],
    [1 / 3, 0.0], [2 / 3, 0.0],
    [2 / 3, 1 / 3], [1 / 3, 2 / 3],
    [0.0, 2 / 3], [0.0, 1 / 3],
    [1 / 3, 1 / 3],
])

# exponents (a, b) of the monomials x^a y^b spanning P3
MONOMIALS = np.array([(a, d - a) for d in range(4) for a in range(d, -1, -1)])


def _monomial_table(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values, gradients and Hessians of the P3 monomials at ``points`` (n, 2)."""
    x = points[:, 0][:, None]
    y = points[:, 1][:, None]
    a = MONOMIALS[:, 0][None, :]
    b = MONOMIALS[:, 1][None, :]

    def power(base, exp):
        # base**exp with 0**negative treated as 0 (the coefficient vanishes there)
        return np.where(exp >= 0, base ** np.maximum(exp, 0), 0.0)

    values = power(x, a) * power(y, b)
    dx = a * power(x, a - 1) * power(y, b)
    dy = b * power(x, a) * power(y, b - 1)
    dxx = a * (a - 1) * power(x, a - 2) * power(y, b)
    dxy = a * b * power(x, a - 1) * power(y, b - 1)
    dyy = b * (b - 1) * power(x, a) * power(y, b - 2)
    grads = np.stack([dx, dy], axis=-1)
    hess = np.stack([np.stack([dxx, dxy], axis=-1), np.stack([dxy, dyy], axis=-1)], axis=-2)
    return values, grads, hess


@dataclass(frozen=True)
class P3ReferenceElement:
    """Nodes and monomial coefficients of the 10 cubic Lagrange basis functions."""
    nodes: np.ndarray
    coefficients: np.ndarray   # (10 monomials, 10 basis functions)

    @classmethod
    def create(cls) -> "P3ReferenceElement":
        vandermonde, _, _ = _monomial_table(REFERENCE_NODES)
        return cls(nodes=REFERENCE_NODES.copy(), coefficients=np.linalg.inv(vandermonde))

    def tabulate(self, points) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Basis values (n, 10), gradients (n, 10, 2) and Hessians (n, 10, 2, 2)
        at reference points (n, 2).
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values, grads, hess = _monomial_table(points)
        c = self.coefficients
        return (
            values @ c,
            np.einsum("nmk,mi->nik", grads, c),
            np.einsum("nmkl,mi->nikl", hess, c),
        )


@lru_cache(maxsize=1)
def reference_element() -> P3ReferenceElement:
    return P3ReferenceElement.create()


def eval_basis(point) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Values, gradients and Hessians of the 10 basis functions.

    A single point gives shapes (10,), (10, 2), (10, 2, 2); an (n, 2) array of
    points adds a leading axis.
    """
    point = np.asarray(point, dtype=float)
    values, grads, hess = reference_element().tabulate(point)
    if point.ndim == 1:
        return values[0], grads[0], hess[0]
    return values, grads, hess


@dataclass(frozen=True)
class QuadratureRule:
    """Points and weights on the reference triangle (dim 2) or [0, 1] (dim 1)."""
    points: np.ndarray
    weights: np.ndarray
    degree: int
    dim: int

    @property
    def n_points(self) -> int:
        return len(self.weights)

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.points)))


@lru_cache(maxsize=1)
def cell_quadrature() -> QuadratureRule:
    """12-point symmetric rule, exact for degree 6 (Dunavant)."""
    a, b = 0.873821971016996, 0.063089014491502
    c, d = 0.501426509658179, 0.249286745170910
    e, f, g = 0.636502499121399, 0.310352451033785, 0.053145049844816
    u, v, w = 0.050844906370207, 0.116786275726379, 0.082851075618374
    x = np.array([a, b, b, d, c, d, e, e, f, f, g, g])
    y = np.array([b, a, b, c, d, d, f, g, e, g, e, f])
    weights = 0.5 * np.array([u, u, u, v, v, v, w, w, w, w, w, w])
    return QuadratureRule(points=np.column_stack([x, y]), weights=weights, degree=6, dim=2)


@lru_cache(maxsize=1)
def edge_quadrature() -> QuadratureRule:
    """4-point Gauss-Legendre on [0, 1], exact for degree 7."""
    nodes, weights = np.polynomial.legendre.leggauss(4)
    return QuadratureRule(points=0.5 * (nodes + 1.0), weights=0.5 * weights, degree=7, dim=1)


@dataclass(frozen=True)
class AffineMap:
    """
    x = origin + J ξ. Fields may carry leading batch axes, one map per cell.
    """
    origin: np.ndarray
    jacobian: np.ndarray
    inverse: np.ndarray
    det: np.ndarray

    @classmethod
    def from_triangle(cls, corners) -> "AffineMap":
        """Map of a triangle (3, 2) or a stack of triangles (T, 3, 2)."""
        corners = np.asarray(corners, dtype=float)
        origin = corners[..., 0, :]
        jac = np.stack([corners[..., 1, :] - origin, corners[..., 2, :] - origin], axis=-1)
        return cls.from_jacobian(jac, origin)

    @classmethod
    def from_jacobian(cls, jacobian, origin=None) -> "AffineMap":
        jac = np.asarray(jacobian, dtype=float)
        det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        if np.any(det <= 0):
            raise GeometryError(f"affine map with non-positive determinant {np.min(det):.3e}")
        inv = np.empty_like(jac)
        inv[..., 0, 0] = jac[..., 1, 1]
        inv[..., 1, 1] = jac[..., 0, 0]
        inv[..., 0, 1] = -jac[..., 0, 1]
        inv[..., 1, 0] = -jac[..., 1, 0]
        inv /= det[..., None, None]
        if origin is None:
            origin = np.zeros(jac.shape[:-1])
        return cls(origin=np.asarray(origin, dtype=float), jacobian=jac, inverse=inv, det=det)

    def to_physical(self, ref_points: np.ndarray) -> np.ndarray:
        """Reference points (q, 2) to physical points (..., q, 2)."""
        return self.origin[..., None, :] + np.einsum("...ij,qj->...qi", self.jacobian, ref_points)


def physical_derivatives(ref_grads: np.ndarray, ref_hess: np.ndarray, mapping: AffineMap):
    """
    Chain rule for an affine map: ∇ = J⁻ᵀ∇_ref and ∇² = J⁻ᵀ ∇²_ref J⁻¹.

    ``ref_grads`` (..., 2) and ``ref_hess`` (..., 2, 2) share their leading
    axes; for batched maps the first axis indexes cells.
    """
    if np.any(np.asarray(mapping.det) <= 0):
        raise GeometryError("degenerate affine map")
    inv = mapping.inverse
    if inv.ndim == 2:
        grads = ref_grads @ inv
        hess = inv.T @ ref_hess @ inv
        return grads, hess
    extra = ref_grads.ndim - 2
    inv_b = inv.reshape(inv.shape[:1] + (1,) * extra + (2, 2))
    grads = np.einsum("...k,...kl->...l", ref_grads, inv_b)
    hess = np.einsum("...ki,...kl,...lj->...ij", inv_b, ref_hess, inv_b)
    return grads, hess
