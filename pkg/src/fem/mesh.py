"""
Triangulations of the unit disc with the edge topology used by DG edge loops.

Edges are stored with the lower vertex index first. ``edge_to_triangles``
holds ``(T-, T+)`` per edge with ``T- < T+``; boundary edges store ``-1`` as
``T+``. Normals of interior edges point from ``T-`` into ``T+`` and normals
of boundary edges point out of the domain.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import meshio
import numpy as np
from scipy.spatial import cKDTree

from ..errors import GeometryError, MeshParseError, ParameterError
from ..performance import track_performance
from .element import AffineMap

logger = logging.getLogger(__name__)

EPS_GEOM = 1e-12

# Local edge k of a triangle joins local vertices LOCAL_EDGES[k].
LOCAL_EDGES = np.array([[0, 1], [1, 2], [2, 0]])


@dataclass(frozen=True)
class EdgeGeometry:
    """Geometry of one edge."""
    normal: np.ndarray
    tangent: np.ndarray
    length: float
    midpoint: np.ndarray
    avg_diameter: float
    minus: int
    plus: int          # -1 on boundary edges

    @property
    def is_boundary(self) -> bool:
        return self.plus < 0


@dataclass(frozen=True)
class EdgeGeometryTable:
    """Vectorised ``EdgeGeometry`` for all edges."""
    normals: np.ndarray        # (E, 2)
    tangents: np.ndarray       # (E, 2)
    lengths: np.ndarray        # (E,)
    midpoints: np.ndarray      # (E, 2)
    avg_diameters: np.ndarray  # (E,)


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class Mesh:
    """
    Conforming triangle mesh.

    Parameters
    ----------
    vertices : array_like, shape (V, 2)
    triangles : array_like, shape (T, 3)
        Vertex indices. Clockwise triangles are reoriented.
    edge_to_triangles : array_like, optional
        Explicit ``(T-, T+)`` labels, used to check that results do not
        depend on the labelling. Computed when omitted.
    """

    def __init__(self, vertices, triangles, edge_to_triangles: Optional[np.ndarray] = None):
        vertices = np.array(vertices, dtype=float)
        triangles = np.array(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise GeometryError("vertices must have shape (V, 2)")
        if triangles.ndim != 2 or triangles.shape[1] != 3 or len(triangles) == 0:
            raise GeometryError("triangles must have shape (T, 3) with T >= 1")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise GeometryError("triangle vertex index out of range")

        area = self._signed_areas(vertices, triangles)
        if np.any(np.abs(area) <= EPS_GEOM):
            bad = int(np.argmin(np.abs(area)))
            raise GeometryError(f"triangle {bad} is degenerate (area {area[bad]:.3e})")
        flipped = area < 0
        if np.any(flipped):
            logger.debug("reorienting %d clockwise triangles", int(flipped.sum()))
            triangles[flipped] = triangles[flipped][:, [0, 2, 1]]

        local = np.sort(triangles[:, LOCAL_EDGES].reshape(-1, 2), axis=1)
        edges, inverse = np.unique(local, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        counts = np.bincount(inverse, minlength=len(edges))
        if np.any(counts > 2):
            raise GeometryError(f"{int((counts > 2).sum())} edges are shared by more than two triangles")

        if edge_to_triangles is None:
            order = np.argsort(inverse, kind="stable")
            owners = order // 3
            first = np.searchsorted(inverse[order], np.arange(len(edges)))
            edge_to_triangles = np.full((len(edges), 2), -1, dtype=np.int64)
            edge_to_triangles[:, 0] = owners[first]
            interior = counts == 2
            edge_to_triangles[interior, 1] = owners[first[interior] + 1]
        else:
            edge_to_triangles = np.array(edge_to_triangles, dtype=np.int64)
            if edge_to_triangles.shape != (len(edges), 2):
                raise GeometryError("edge_to_triangles does not match the edge set")

        self.vertices = _readonly(vertices)
        self.triangles = _readonly(triangles)
        self.edges = _readonly(edges.astype(np.int64))
        self.cell_edges = _readonly(inverse.reshape(-1, 3).astype(np.int64))
        self.edge_to_triangles = _readonly(edge_to_triangles)
        self.boundary_flags = _readonly(edge_to_triangles[:, 1] < 0)
        corners = vertices[triangles]
        lengths = np.linalg.norm(corners[:, [1, 2, 0]] - corners, axis=2)
        self.triangle_diameters = _readonly(lengths.max(axis=1))
        self._geometry: Optional[EdgeGeometryTable] = None
        self._maps: Optional[AffineMap] = None
        self._tree: Optional[cKDTree] = None

    @staticmethod
    def _signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
        a, b, c = (vertices[triangles[:, k]] for k in range(3))
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def signed_areas(self) -> np.ndarray:
        return self._signed_areas(self.vertices, self.triangles)

    @property
    def h_max(self) -> float:
        return float(self.triangle_diameters.max())

    @property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.edges[self.boundary_flags])

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    @property
    def geometry(self) -> EdgeGeometryTable:
        if self._geometry is None:
            self._geometry = _edge_geometry_table(self)
        return self._geometry

    @property
    def maps(self) -> AffineMap:
        """Reference-to-cell affine maps, batched over triangles."""
        if self._maps is None:
            self._maps = AffineMap.from_triangle(self.vertices[self.triangles])
        return self._maps

    @property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    @property
    def centroid_tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.centroids)
        return self._tree

    def relabeled(self) -> "Mesh":
        """Same mesh with ``T-`` and ``T+`` exchanged on every interior edge."""
        swapped = self.edge_to_triangles.copy()
        interior = ~self.boundary_flags
        swapped[interior] = swapped[interior][:, ::-1]
        return Mesh(self.vertices, self.triangles, edge_to_triangles=swapped)

    def permuted(self, permutation: np.ndarray) -> "Mesh":
        """Same mesh with the global triangle order permuted."""
        return Mesh(self.vertices, self.triangles[np.asarray(permutation)])

    def statistics(self) -> Dict[str, float]:
        return {
            "vertices": self.n_vertices,
            "triangles": self.n_triangles,
            "edges": self.n_edges,
            "boundary_edges": int(self.boundary_flags.sum()),
            "h_max": self.h_max,
            "h_min": float(self.triangle_diameters.min()),
        }

    def __repr__(self) -> str:
        return f"Mesh(vertices={self.n_vertices}, triangles={self.n_triangles}, edges={self.n_edges})"


def _edge_geometry_table(mesh: Mesh) -> EdgeGeometryTable:
    a = mesh.vertices[mesh.edges[:, 0]]
    b = mesh.vertices[mesh.edges[:, 1]]
    lengths = np.linalg.norm(b - a, axis=1)
    tangents = (b - a) / lengths[:, None]
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]])
    midpoints = 0.5 * (a + b)

    minus = mesh.edge_to_triangles[:, 0]
    centroids = mesh.vertices[mesh.triangles[minus]].mean(axis=1)
    outward = np.einsum("ij,ij->i", normals, midpoints - centroids) > 0
    sign = np.where(outward, 1.0, -1.0)
    normals = normals * sign[:, None]
    # keep (n, t) positively oriented
    tangents = tangents * sign[:, None]

    diam = mesh.triangle_diameters
    plus = mesh.edge_to_triangles[:, 1]
    avg = np.where(plus >= 0, 0.5 * (diam[minus] + diam[np.maximum(plus, 0)]), diam[minus])
    return EdgeGeometryTable(
        normals=_readonly(normals),
        tangents=_readonly(tangents),
        lengths=_readonly(lengths),
        midpoints=_readonly(midpoints),
        avg_diameters=_readonly(avg),
    )


def classify_edges(mesh: Mesh) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(interior edge ids, boundary edge ids)``."""
    return np.flatnonzero(~mesh.boundary_flags), np.flatnonzero(mesh.boundary_flags)


def edge_geometry(mesh: Mesh, edge: int) -> EdgeGeometry:
    """Normal, tangent, length, midpoint and {η}_e of one edge."""
    if not 0 <= edge < mesh.n_edges:
        raise ParameterError(f"edge id {edge} out of range [0, {mesh.n_edges})")
    table = mesh.geometry
    minus, plus = mesh.edge_to_triangles[edge]
    return EdgeGeometry(
        normal=table.normals[edge].copy(),
        tangent=table.tangents[edge].copy(),
        length=float(table.lengths[edge]),
        midpoint=table.midpoints[edge].copy(),
        avg_diameter=float(table.avg_diameters[edge]),
        minus=int(minus),
        plus=int(plus),
    )


def _ring_strip(inner: np.ndarray, outer: np.ndarray):
    """Triangulate the annular strip between two rings, sweeping by angle."""
    n_in, n_out = len(inner), len(outer)
    i = j = 0
    while i < n_in or j < n_out:
        # next outer angle 2π(j+1)/n_out against next inner angle 2π(i+1)/n_in
        if j < n_out and (i == n_in or (j + 1) * n_in <= (i + 1) * n_out):
            yield inner[i % n_in], outer[j % n_out], outer[(j + 1) % n_out]
            j += 1
        else:
            yield inner[i % n_in], outer[j % n_out], inner[(i + 1) % n_in]
            i += 1


@track_performance("mesh")
def generate_disc_mesh(target_h: float) -> Mesh:
    """
    Polar triangulation of the unit disc.

    Ring k sits at radius k/N with 6k points, N = ceil(1.1/target_h); the
    centre is vertex 0 and the outer ring lies on the unit circle.
    """
    if not 0 < target_h < 1:
        raise ParameterError(f"target_h must lie in (0, 1), got {target_h}")
    n_rings = max(1, math.ceil(1.1 / target_h))

    points = [np.zeros((1, 2))]
    rings = [np.array([0])]
    offset = 1
    for k in range(1, n_rings + 1):
        count = 6 * k
        theta = 2.0 * np.pi * np.arange(count) / count
        radius = k / n_rings
        points.append(radius * np.column_stack([np.cos(theta), np.sin(theta)]))
        rings.append(offset + np.arange(count))
        offset += count
    vertices = np.vstack(points)

    first = rings[1]
    triangles = [(0, first[j], first[(j + 1) % 6]) for j in range(6)]
    for inner, outer in zip(rings[1:-1], rings[2:]):
        triangles.extend(_ring_strip(inner, outer))

    mesh = Mesh(vertices, np.array(triangles))
    logger.info("generated disc mesh h=%.4g: %d vertices, %d triangles, h_max=%.4g",
                target_h, mesh.n_vertices, mesh.n_triangles, mesh.h_max)
    return mesh


def import_msh(path: Union[str, Path]) -> Mesh:
    """
    Read an ASCII Gmsh 2.2 file.

    Point and line elements are ignored; any other non-triangle element is
    rejected. Nodes not used by a triangle are dropped.
    """
    path = Path(path)
    try:
        mio = meshio.read(str(path), file_format="gmsh")
    except (meshio.ReadError, ValueError, KeyError, IndexError) as e:
        raise MeshParseError(f"cannot parse {path}: {e}") from e

    blocks = []
    for block in mio.cells:
        if block.type == "triangle":
            blocks.append(np.asarray(block.data))
        elif block.type in ("vertex", "line"):
            logger.debug("ignoring %d %s elements in %s", len(block.data), block.type, path)
        else:
            raise MeshParseError(f"{path}: unsupported element type {block.type!r}")
    if not blocks:
        raise MeshParseError(f"{path}: no triangle elements")

    points = np.asarray(mio.points, dtype=float)
    if points.shape[1] == 3:
        if np.any(np.abs(points[:, 2]) > EPS_GEOM):
            raise MeshParseError(f"{path}: nodes have nonzero third coordinate")
        points = points[:, :2]
    triangles = np.vstack(blocks)

    used = np.unique(triangles)
    if len(used) < len(points):
        logger.warning("%s: dropping %d nodes not referenced by triangles", path, len(points) - len(used))
        renumber = np.full(len(points), -1, dtype=np.int64)
        renumber[used] = np.arange(len(used))
        points, triangles = points[used], renumber[triangles]

    try:
        return Mesh(points, triangles)
    except GeometryError as e:
        raise MeshParseError(f"{path}: {e}") from e


def export_msh(mesh: Mesh, path: Union[str, Path]) -> Path:
    """Write the mesh as an ASCII Gmsh 2.2 file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    points = np.column_stack([mesh.vertices, np.zeros(mesh.n_vertices)])
    tags = np.ones(mesh.n_triangles, dtype=int)
    mio = meshio.Mesh(
        points,
        [("triangle", np.asarray(mesh.triangles))],
        cell_data={"gmsh:physical": [tags], "gmsh:geometrical": [tags]},
    )
    meshio.write(str(path), mio, file_format="gmsh22", binary=False)
    return path
