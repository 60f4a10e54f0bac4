"""
Continuous piecewise cubics vanishing on the boundary.

Global dof numbering: vertices first, then two dofs per edge (the one at
1/3 from the lower-index vertex first), then one dof per triangle. Dofs on
boundary vertices and boundary edges are constrained to zero and removed
from the unknowns.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from ..errors import LocationError, ParameterError
from ..performance import track_performance
from .element import AffineMap, cell_quadrature, edge_quadrature, physical_derivatives, reference_element
from .mesh import EPS_GEOM, LOCAL_EDGES, Mesh

logger = logging.getLogger(__name__)

_CANDIDATES = 16


@dataclass(frozen=True)
class CellTables:
    """Basis data at cell quadrature points."""
    dofs: np.ndarray      # (T, 10)
    points: np.ndarray    # (T, q, 2)
    weights: np.ndarray   # (T, q)  reference weight times |det J|
    values: np.ndarray    # (q, 10)
    grads: np.ndarray     # (T, q, 10, 2)
    hess: np.ndarray      # (T, q, 10, 2, 2)


@dataclass(frozen=True)
class EdgeTables:
    """
    Traces at edge quadrature points for the 20 cell dofs of both sides.

    Entry k < 10 belongs to T-, k >= 10 to T+ (zero on boundary edges).
    Every array is linear in the dof coefficients, so contracting with the
    20 local coefficients of a field gives that field's edge quantity:
    ``jump_n`` → [[∂_n u]], ``avg_nn`` → {∂_nn u}, ``avg_t`` → {∂_t u},
    ``avg_tt`` → {∂_tt u}, ``avg_val`` → {u}.
    """
    dofs: np.ndarray       # (E, 20)
    points: np.ndarray     # (E, g, 2)
    weights: np.ndarray    # (E, g)
    interior: np.ndarray   # (E,)
    penalty: np.ndarray    # (E,)  1/{η}_e
    jump_n: np.ndarray     # (E, g, 20)
    avg_nn: np.ndarray
    avg_t: np.ndarray
    avg_tt: np.ndarray
    avg_val: np.ndarray


class DofMap:
    """Cell-to-dof tables and the free/constrained partition."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        n_v, n_e, n_t = mesh.n_vertices, mesh.n_edges, mesh.n_triangles
        self.n_dofs = n_v + 2 * n_e + n_t

        tri = mesh.triangles
        cell_dofs = np.empty((n_t, 10), dtype=np.int64)
        cell_dofs[:, :3] = tri
        for k, (a, _) in enumerate(LOCAL_EDGES):
            edge = mesh.cell_edges[:, k]
            forward = tri[:, a] == mesh.edges[edge, 0]
            first = n_v + 2 * edge
            cell_dofs[:, 3 + 2 * k] = np.where(forward, first, first + 1)
            cell_dofs[:, 4 + 2 * k] = np.where(forward, first + 1, first)
        cell_dofs[:, 9] = n_v + 2 * n_e + np.arange(n_t)
        cell_dofs.setflags(write=False)
        self.cell_dofs = cell_dofs

        constrained = np.zeros(self.n_dofs, dtype=bool)
        constrained[mesh.boundary_vertices] = True
        boundary_edges = np.flatnonzero(mesh.boundary_flags)
        constrained[n_v + 2 * boundary_edges] = True
        constrained[n_v + 2 * boundary_edges + 1] = True
        self.constrained = constrained
        self.free_dofs = np.flatnonzero(~constrained)
        self.free_index = np.full(self.n_dofs, -1, dtype=np.int64)
        self.free_index[self.free_dofs] = np.arange(len(self.free_dofs))

        self._coordinates: Optional[np.ndarray] = None
        self._cells: Optional[CellTables] = None
        self._edges: Optional[EdgeTables] = None
        # linear DG operators keyed by (alpha, scale), filled by forms
        self.operator_cache: Dict[Tuple[float, float], Any] = {}

    @property
    def n_free(self) -> int:
        return len(self.free_dofs)

    @property
    def dof_coordinates(self) -> np.ndarray:
        if self._coordinates is None:
            coords = np.empty((self.n_dofs, 2))
            physical = self.mesh.maps.to_physical(reference_element().nodes)
            coords[self.cell_dofs.ravel()] = physical.reshape(-1, 2)
            self._coordinates = coords
        return self._coordinates

    def cell_tables(self) -> CellTables:
        if self._cells is None:
            self._cells = _build_cell_tables(self)
        return self._cells

    def edge_tables(self) -> EdgeTables:
        if self._edges is None:
            self._edges = _build_edge_tables(self)
        return self._edges

    def __repr__(self) -> str:
        return f"DofMap(dofs={self.n_dofs}, free={self.n_free})"


@track_performance("dofmap")
def build_dofmap(mesh: Mesh) -> DofMap:
    dofmap = DofMap(mesh)
    logger.debug("dofmap: %d dofs, %d free", dofmap.n_dofs, dofmap.n_free)
    return dofmap


def _build_cell_tables(dofmap: DofMap) -> CellTables:
    rule = cell_quadrature()
    maps = dofmap.mesh.maps
    values, grads_ref, hess_ref = reference_element().tabulate(rule.points)
    inv = maps.inverse
    grads = np.einsum("qik,tkl->tqil", grads_ref, inv)
    hess = np.einsum("tki,qmkl,tlj->tqmij", inv, hess_ref, inv)
    return CellTables(
        dofs=dofmap.cell_dofs,
        points=maps.to_physical(rule.points),
        weights=rule.weights[None, :] * maps.det[:, None],
        values=values,
        grads=grads,
        hess=hess,
    )


def _side_traces(dofmap: DofMap, cells: np.ndarray, points: np.ndarray):
    """Basis values, physical gradients and Hessians of ``cells`` at ``points`` (E, g, 2)."""
    maps = dofmap.mesh.maps
    inv = maps.inverse[cells]
    ref = np.einsum("eij,egj->egi", inv, points - maps.origin[cells][:, None, :])
    n_e, n_g = ref.shape[:2]
    values, grads_ref, hess_ref = reference_element().tabulate(ref.reshape(-1, 2))
    values = values.reshape(n_e, n_g, 10)
    grads_ref = grads_ref.reshape(n_e, n_g, 10, 2)
    hess_ref = hess_ref.reshape(n_e, n_g, 10, 2, 2)
    grads = np.einsum("egmk,ekl->egml", grads_ref, inv)
    hess = np.einsum("eki,egmkl,elj->egmij", inv, hess_ref, inv)
    return values, grads, hess


def _build_edge_tables(dofmap: DofMap) -> EdgeTables:
    mesh = dofmap.mesh
    geo = mesh.geometry
    rule = edge_quadrature()
    a = mesh.vertices[mesh.edges[:, 0]]
    b = mesh.vertices[mesh.edges[:, 1]]
    points = a[:, None, :] + rule.points[None, :, None] * (b - a)[:, None, :]
    weights = rule.weights[None, :] * geo.lengths[:, None]

    interior = ~mesh.boundary_flags
    minus = mesh.edge_to_triangles[:, 0]
    plus = np.where(interior, mesh.edge_to_triangles[:, 1], minus)
    n, t = geo.normals, geo.tangents

    # [[∂_n u]] = ∂_n u(T⁻) − ∂_n u(T⁺) with n leaving T⁻; swapping the two
    # sides also flips n, so the jump does not depend on the edge labelling.
    # Boundary edges keep the T⁻ trace alone.
    parts = {name: [] for name in ("jump_n", "avg_nn", "avg_t", "avg_tt", "avg_val")}
    for cells, sign in ((minus, 1.0), (plus, -1.0)):
        values, grads, hess = _side_traces(dofmap, cells, points)
        if sign > 0:
            jump_sign = np.ones(len(cells))
            avg_weight = np.where(interior, 0.5, 1.0)
        else:
            jump_sign = np.where(interior, -1.0, 0.0)
            avg_weight = np.where(interior, 0.5, 0.0)
        js = jump_sign[:, None, None]
        aw = avg_weight[:, None, None]
        parts["jump_n"].append(js * np.einsum("egmi,ei->egm", grads, n))
        parts["avg_nn"].append(aw * np.einsum("egmij,ei,ej->egm", hess, n, n))
        parts["avg_t"].append(aw * np.einsum("egmi,ei->egm", grads, t))
        parts["avg_tt"].append(aw * np.einsum("egmij,ei,ej->egm", hess, t, t))
        parts["avg_val"].append(aw * values)

    dofs = np.concatenate([dofmap.cell_dofs[minus], dofmap.cell_dofs[plus]], axis=1)
    return EdgeTables(
        dofs=dofs,
        points=points,
        weights=weights,
        interior=interior,
        penalty=1.0 / geo.avg_diameters,
        **{name: np.concatenate(arrays, axis=2) for name, arrays in parts.items()},
    )


@dataclass(frozen=True)
class Field:
    """Coefficients of a function of V(T) on the free dofs."""
    dofmap: DofMap
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=float)
        if coefficients.shape != (self.dofmap.n_free,):
            raise ParameterError(f"expected {self.dofmap.n_free} coefficients, got {coefficients.shape}")
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def zeros(cls, dofmap: DofMap) -> "Field":
        return cls(dofmap, np.zeros(dofmap.n_free))

    def full(self) -> np.ndarray:
        """Coefficients over all dofs, zeros on constrained ones."""
        values = np.zeros(self.dofmap.n_dofs)
        values[self.dofmap.free_dofs] = self.coefficients
        return values

    def local(self) -> np.ndarray:
        """Per-cell coefficients (T, 10)."""
        return self.full()[self.dofmap.cell_dofs]

    def __add__(self, other: "Field") -> "Field":
        return Field(self.dofmap, self.coefficients + other.coefficients)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.dofmap, self.coefficients - other.coefficients)

    def __mul__(self, factor: float) -> "Field":
        return Field(self.dofmap, factor * self.coefficients)

    __rmul__ = __mul__


@dataclass(frozen=True)
class PlateState:
    """The pair (v, w) on one space."""
    v: Field
    w: Field

    @classmethod
    def zeros(cls, dofmap: DofMap) -> "PlateState":
        return cls(Field.zeros(dofmap), Field.zeros(dofmap))

    @classmethod
    def from_vector(cls, dofmap: DofMap, x: np.ndarray) -> "PlateState":
        n = dofmap.n_free
        return cls(Field(dofmap, x[:n]), Field(dofmap, x[n:]))

    @property
    def dofmap(self) -> DofMap:
        return self.v.dofmap

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.v.coefficients, self.w.coefficients])


@dataclass(frozen=True)
class PointLocation:
    cell: int
    reference: np.ndarray    # (ξ1, ξ2) on the reference triangle
    barycentric: np.ndarray  # (λ0, λ1, λ2)


def _barycentric(mesh: Mesh, cells: np.ndarray, points: np.ndarray) -> np.ndarray:
    maps = mesh.maps
    ref = np.einsum("...ij,...j->...i", maps.inverse[cells], points - maps.origin[cells])
    return np.concatenate([1.0 - ref.sum(axis=-1, keepdims=True), ref], axis=-1)


def locate_points(mesh: Mesh, points: np.ndarray, tol: float = EPS_GEOM) -> Tuple[np.ndarray, np.ndarray]:
    """
    Containing cells (-1 outside) and barycentric coordinates of ``points`` (n, 2).

    Candidates come from the nearest cell centroids; points they miss are
    checked against every cell. Among containing cells the one where the
    point is deepest inside wins.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(points)
    k = min(_CANDIDATES, mesh.n_triangles)
    _, candidates = mesh.centroid_tree.query(points, k=k)
    candidates = np.asarray(candidates).reshape(n, k)
    bary = _barycentric(mesh, candidates, points[:, None, :])
    depth = bary.min(axis=-1)
    best = np.argmax(depth, axis=1)
    rows = np.arange(n)
    cells = candidates[rows, best]
    lam = bary[rows, best]
    found = depth[rows, best] >= -tol

    missed = np.flatnonzero(~found)
    if len(missed):
        all_cells = np.arange(mesh.n_triangles)
        for i in missed:
            b = _barycentric(mesh, all_cells, points[i][None, :])
            d = b.min(axis=-1)
            j = int(np.argmax(d))
            if d[j] >= -tol:
                cells[i], lam[i], found[i] = j, b[j], True
    cells = np.where(found, cells, -1)
    return cells, lam


def locate_point(mesh: Mesh, point) -> PointLocation:
    """Cell containing ``point`` with reference and barycentric coordinates."""
    point = np.asarray(point, dtype=float)
    cells, lam = locate_points(mesh, point[None, :])
    if cells[0] < 0:
        raise LocationError(point)
    return PointLocation(cell=int(cells[0]), reference=lam[0, 1:].copy(), barycentric=lam[0].copy())


def evaluate_points(field: Field, points, derivatives: bool = False, outside: str = "raise"):
    """
    Values of ``field`` at ``points`` (n, 2), optionally with gradients and Hessians.

    ``outside`` selects what happens to points outside the mesh: "raise"
    raises ``LocationError``, "nan" and "zero" fill the value.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    mesh = field.dofmap.mesh
    cells, lam = locate_points(mesh, points)
    missing = cells < 0
    if np.any(missing):
        if outside == "raise":
            raise LocationError(points[np.argmax(missing)])
        cells = np.where(missing, 0, cells)
        lam = np.where(missing[:, None], 1.0 / 3.0, lam)

    coeffs = field.local()[cells]
    values, grads_ref, hess_ref = reference_element().tabulate(lam[:, 1:])
    result = np.einsum("nm,nm->n", values, coeffs)
    fill = np.nan if outside == "nan" else 0.0
    result = np.where(missing, fill, result)
    if not derivatives:
        return result

    inv = mesh.maps.inverse[cells]
    grads = np.einsum("nmk,nkl,nm->nl", grads_ref, inv, coeffs)
    hess = np.einsum("nki,nmkl,nlj,nm->nij", inv, hess_ref, inv, coeffs)
    grads = np.where(missing[:, None], fill, grads)
    hess = np.where(missing[:, None, None], fill, hess)
    return result, grads, hess


def evaluate(field: Field, point, derivatives: bool = False):
    """Value of ``field`` at one point, optionally with gradient and Hessian."""
    location = locate_point(field.dofmap.mesh, point)
    coeffs = field.local()[location.cell]
    values, grads_ref, hess_ref = reference_element().tabulate(location.reference)
    value = float(values[0] @ coeffs)
    if not derivatives:
        return value
    cell_map = field.dofmap.mesh.maps
    single = AffineMap.from_jacobian(cell_map.jacobian[location.cell], cell_map.origin[location.cell])
    grads, hess = physical_derivatives(grads_ref[0], hess_ref[0], single)
    return value, coeffs @ grads, np.einsum("m,mij->ij", coeffs, hess)


def interpolate(mesh: Mesh, dofmap: DofMap, function: Callable[[np.ndarray], np.ndarray]) -> Field:
    """Nodal interpolant; ``function`` maps (n, 2) points to (n,) values."""
    if dofmap.mesh is not mesh:
        raise ParameterError("dofmap was built on a different mesh")
    coords = dofmap.dof_coordinates[dofmap.free_dofs]
    values = np.asarray(function(coords), dtype=float)
    values = np.broadcast_to(values, (len(coords),))
    if not np.all(np.isfinite(values)):
        raise ParameterError("interpolated function is not finite at every node")
    return Field(dofmap, values.copy())
