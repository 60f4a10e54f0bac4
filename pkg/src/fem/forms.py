"""
Residual, Jacobian and discrete functional of the coupled plate system.

The residual is the gradient of

    I(v, w) = Σ_T ∫ -½|∇²v|² + ½ cof(∇²v):(∇w⊗∇w) + (c_ν/2)|∇²w|² - γβ⁴ p w
              + β² Σ_i s_i v(y_i) + c_ν L1(w) + L2(w) - L1(v) - L2(v)
              - ½ Σ_{e interior} ∫ (∂_t w)² [[∂_n v]]

with L1(u) = -Σ_e ∫ [[∂_n u]] {∂_nn u} and L2(u) = ½ Σ_e α/{η}_e ∫ [[∂_n u]]².
Jumps of normal derivatives are taken as ∂_n u(T-) - ∂_n u(T+) with n
pointing from T- into T+, and as ∂_n u on boundary edges.

BNRS17 and CMN18 replace the cell coupling by Monge-Ampère brackets;
BNRS17 adds bracket edge corrections, CMN18 drops the edge coupling.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
import scipy.sparse as sp

from ..errors import ParameterError
from ..models.problem import FormulationVariant, PlateProblem
from ..performance import track_performance
from .mesh import Mesh
from .space import DofMap, PlateState, evaluate, locate_point
from .element import eval_basis

logger = logging.getLogger(__name__)


def cof(matrix: np.ndarray) -> np.ndarray:
    """Cofactor of 2×2 matrices stacked on the last two axes."""
    out = np.empty_like(matrix)
    out[..., 0, 0] = matrix[..., 1, 1]
    out[..., 1, 1] = matrix[..., 0, 0]
    out[..., 0, 1] = -matrix[..., 1, 0]
    out[..., 1, 0] = -matrix[..., 0, 1]
    return out


def bracket(f_hess: np.ndarray, g_hess: np.ndarray) -> np.ndarray:
    """Monge-Ampère bracket [f, g] = cof(∇²f):∇²g."""
    return np.einsum("...ij,...ij->...", cof(f_hess), g_hess)


@dataclass
class AssembledSystem:
    """Block residual (R_v; R_w) and block Jacobian over the free dofs."""
    residual: np.ndarray
    jacobian: Optional[sp.csr_matrix]
    n_free: int

    @property
    def residual_v(self) -> np.ndarray:
        return self.residual[: self.n_free]

    @property
    def residual_w(self) -> np.ndarray:
        return self.residual[self.n_free:]

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.residual))


# ---------------------------------------------------------------------------
# scatter helpers


def _free_matrix(dofmap: DofMap, dofs: np.ndarray, local: np.ndarray) -> sp.csr_matrix:
    """Sum per-entity (N, a, a) blocks into the free-dof matrix."""
    idx = dofmap.free_index[dofs]
    rows = np.broadcast_to(idx[:, :, None], local.shape)
    cols = np.broadcast_to(idx[:, None, :], local.shape)
    keep = (rows >= 0) & (cols >= 0)
    n = dofmap.n_free
    return sp.coo_matrix((local[keep], (rows[keep], cols[keep])), shape=(n, n)).tocsr()


def _free_vector(dofmap: DofMap, dofs: np.ndarray, local: np.ndarray) -> np.ndarray:
    idx = dofmap.free_index[dofs].ravel()
    keep = idx >= 0
    return np.bincount(idx[keep], weights=local.ravel()[keep], minlength=dofmap.n_free)


# ---------------------------------------------------------------------------
# field data at quadrature points


def _cell_data(dofmap: DofMap, coefficients: np.ndarray) -> Dict[str, np.ndarray]:
    cells = dofmap.cell_tables()
    c = coefficients[cells.dofs]
    return {
        "value": np.einsum("qm,tm->tq", cells.values, c),
        "grad": np.einsum("tqmi,tm->tqi", cells.grads, c),
        "hess": np.einsum("tqmij,tm->tqij", cells.hess, c),
    }


def _edge_data(dofmap: DofMap, coefficients: np.ndarray) -> Dict[str, np.ndarray]:
    edges = dofmap.edge_tables()
    c = coefficients[edges.dofs]
    return {
        name: np.einsum("egm,em->eg", getattr(edges, name), c)
        for name in ("jump_n", "avg_nn", "avg_t", "avg_tt", "avg_val")
    }


def _state_data(state: PlateState):
    dofmap = state.dofmap
    v_full, w_full = state.v.full(), state.w.full()
    return (
        _cell_data(dofmap, v_full), _cell_data(dofmap, w_full),
        _edge_data(dofmap, v_full), _edge_data(dofmap, w_full),
    )


def _check_variant(problem: PlateProblem) -> FormulationVariant:
    variant = problem.variant
    if not isinstance(variant, FormulationVariant):
        raise ParameterError(f"unsupported variant {variant!r}")
    return variant


# ---------------------------------------------------------------------------
# linear parts


@track_performance("assembly")
def assemble_biharmonic_dg(mesh: Mesh, dofmap: DofMap, alpha: float = 300.0, scale: float = 1.0) -> sp.csr_matrix:
    """
    Symmetric interior-penalty form on the free dofs:

        scale·(Σ_T ∫ ∇²u:∇²φ - Σ_e ∫ [[∂_n u]]{∂_nn φ} + [[∂_n φ]]{∂_nn u})
        + Σ_e α/{η}_e ∫ [[∂_n u]][[∂_n φ]]

    over all edges. ``scale`` = c_ν gives the bending operator.
    """
    if dofmap.mesh is not mesh:
        raise ParameterError("dofmap was built on a different mesh")
    if not alpha > 0:
        raise ParameterError(f"penalty alpha must be positive, got {alpha}")
    key = (float(alpha), float(scale))
    cached = dofmap.operator_cache.get(key)
    if cached is not None:
        return cached

    cells = dofmap.cell_tables()
    cell_local = scale * np.einsum("tqaij,tqbij,tq->tab", cells.hess, cells.hess, cells.weights, optimize=True)

    edges = dofmap.edge_tables()
    jn, ann, wts = edges.jump_n, edges.avg_nn, edges.weights
    consistency = np.einsum("ega,egb,eg->eab", jn, ann, wts, optimize=True)
    penalty = np.einsum("ega,egb,eg->eab", jn, jn, wts * (alpha * edges.penalty)[:, None], optimize=True)
    edge_local = penalty - scale * (consistency + consistency.transpose(0, 2, 1))

    matrix = _free_matrix(dofmap, cells.dofs, cell_local) + _free_matrix(dofmap, edges.dofs, edge_local)
    matrix = matrix.tocsr()
    dofmap.operator_cache[key] = matrix
    return matrix


def assemble_dirac_load(dofmap: DofMap, disclinations, beta: float) -> np.ndarray:
    """β² Σ_i s_i φ_j(y_i) for every free basis function φ_j."""
    load = np.zeros(dofmap.n_free)
    mesh = dofmap.mesh
    for y, s in zip(disclinations.positions, disclinations.angles):
        location = locate_point(mesh, y)
        values, _, _ = eval_basis(location.reference)
        dofs = dofmap.cell_dofs[location.cell]
        load += _free_vector(dofmap, dofs[None, :], (beta ** 2 * s * values)[None, :])
    return load


def assemble_pressure_load(dofmap: DofMap, load, factor: float, full: bool = False) -> np.ndarray:
    """
    factor·∫ p φ_j for every free basis function (every dof with ``full``).

    ``load`` maps (n, 2) points to values; ``factor`` is γβ⁴.
    """
    cells = dofmap.cell_tables()
    if load is None:
        return np.zeros(dofmap.n_dofs if full else dofmap.n_free)
    points = cells.points.reshape(-1, 2)
    p = np.broadcast_to(np.asarray(load(points), dtype=float), (len(points),)).reshape(cells.weights.shape)
    local = factor * np.einsum("qm,tq->tm", cells.values, p * cells.weights)
    if full:
        return np.bincount(cells.dofs.ravel(), weights=local.ravel(), minlength=dofmap.n_dofs)
    return _free_vector(dofmap, cells.dofs, local)


def _operators(state: PlateState, problem: PlateProblem):
    dofmap = state.dofmap
    a_v = assemble_biharmonic_dg(dofmap.mesh, dofmap, problem.alpha, 1.0)
    a_w = assemble_biharmonic_dg(dofmap.mesh, dofmap, problem.alpha, problem.c_nu)
    return a_v, a_w


def _loads(dofmap: DofMap, problem: PlateProblem):
    dirac = assemble_dirac_load(dofmap, problem.disclinations, problem.beta)
    pressure = assemble_pressure_load(dofmap, problem.load, problem.load_factor)
    return dirac, pressure


# ---------------------------------------------------------------------------
# nonlinear coupling


def _coupling_residual(state: PlateState, variant: FormulationVariant):
    dofmap = state.dofmap
    cells, edges = dofmap.cell_tables(), dofmap.edge_tables()
    cv, cw, ev, ew = _state_data(state)
    wts = cells.weights

    if variant is FormulationVariant.VAR:
        k = cof(np.einsum("tqi,tqj->tqij", cw["grad"], cw["grad"]))
        rv_cell = 0.5 * np.einsum("tqmij,tqij,tq->tm", cells.hess, k, wts, optimize=True)
        flux = np.einsum("tqij,tqj->tqi", cof(cv["hess"]), cw["grad"])
        rw_cell = np.einsum("tqmi,tqi,tq->tm", cells.grads, flux, wts, optimize=True)
    else:
        rv_cell = -0.5 * np.einsum("qm,tq->tm", cells.values, bracket(cw["hess"], cw["hess"]) * wts)
        rw_cell = -np.einsum("qm,tq->tm", cells.values, bracket(cv["hess"], cw["hess"]) * wts)

    wts_in = edges.weights * edges.interior[:, None]
    if variant is FormulationVariant.VAR:
        tw = ew["avg_t"]
        rv_edge = -0.5 * np.einsum("egm,eg->em", edges.jump_n, wts_in * tw ** 2)
        rw_edge = -np.einsum("egm,eg->em", edges.avg_t, wts_in * tw * ev["jump_n"])
    elif variant is FormulationVariant.BNRS17:
        rv_edge = 0.5 * np.einsum("egm,eg->em", edges.avg_val, wts_in * ew["jump_n"] * ew["avg_tt"])
        mixed = ew["jump_n"] * ev["avg_tt"] + ev["jump_n"] * ew["avg_tt"]
        rw_edge = 0.5 * np.einsum("egm,eg->em", edges.avg_val, wts_in * mixed)
    else:
        rv_edge = rw_edge = None

    r_v = _free_vector(dofmap, cells.dofs, rv_cell)
    r_w = _free_vector(dofmap, cells.dofs, rw_cell)
    if rv_edge is not None:
        r_v += _free_vector(dofmap, edges.dofs, rv_edge)
        r_w += _free_vector(dofmap, edges.dofs, rw_edge)
    return r_v, r_w


def _coupling_jacobian(state: PlateState, variant: FormulationVariant):
    """Blocks ∂R_v/∂w, ∂R_w/∂v and the coupling part of ∂R_w/∂w (test index first)."""
    dofmap = state.dofmap
    cells, edges = dofmap.cell_tables(), dofmap.edge_tables()
    cv, cw, ev, ew = _state_data(state)
    wts = cells.weights
    wts_in = edges.weights * edges.interior[:, None]

    if variant is FormulationVariant.VAR:
        basis_cof = cof(cells.hess)
        lifted = np.einsum("tqaij,tqj->tqai", basis_cof, cw["grad"])
        vw_cell = np.einsum("tqai,tqbi,tq->tab", lifted, cells.grads, wts, optimize=True)
        wv_cell = vw_cell.transpose(0, 2, 1)
        ww_cell = np.einsum("tqai,tqij,tqbj,tq->tab", cells.grads, cof(cv["hess"]), cells.grads, wts, optimize=True)

        tw = ew["avg_t"]
        vw_edge = -np.einsum("ega,egb,eg->eab", edges.jump_n, edges.avg_t, wts_in * tw, optimize=True)
        wv_edge = vw_edge.transpose(0, 2, 1)
        ww_edge = -np.einsum("ega,egb,eg->eab", edges.avg_t, edges.avg_t, wts_in * ev["jump_n"], optimize=True)
    else:
        vals = cells.values
        vw_cell = -np.einsum("qa,tqbij,tqij,tq->tab", vals, cells.hess, cof(cw["hess"]), wts, optimize=True)
        wv_cell = vw_cell
        ww_cell = -np.einsum("qa,tqbij,tqij,tq->tab", vals, cells.hess, cof(cv["hess"]), wts, optimize=True)

        if variant is FormulationVariant.BNRS17:
            val = edges.avg_val
            vw_edge = 0.5 * (
                np.einsum("ega,egb,eg->eab", val, edges.jump_n, wts_in * ew["avg_tt"], optimize=True)
                + np.einsum("ega,egb,eg->eab", val, edges.avg_tt, wts_in * ew["jump_n"], optimize=True)
            )
            wv_edge = vw_edge
            ww_edge = 0.5 * (
                np.einsum("ega,egb,eg->eab", val, edges.jump_n, wts_in * ev["avg_tt"], optimize=True)
                + np.einsum("ega,egb,eg->eab", val, edges.avg_tt, wts_in * ev["jump_n"], optimize=True)
            )
        else:
            vw_edge = wv_edge = ww_edge = None

    blocks = []
    for cell_local, edge_local in ((vw_cell, vw_edge), (wv_cell, wv_edge), (ww_cell, ww_edge)):
        matrix = _free_matrix(dofmap, cells.dofs, cell_local)
        if edge_local is not None:
            matrix = matrix + _free_matrix(dofmap, edges.dofs, edge_local)
        blocks.append(matrix.tocsr())
    return tuple(blocks)


# ---------------------------------------------------------------------------
# public operations


def assemble_residual(state: PlateState, problem: PlateProblem) -> np.ndarray:
    """R = (∂I/∂v; ∂I/∂w) tested against every free basis function."""
    variant = _check_variant(problem)
    a_v, a_w = _operators(state, problem)
    dirac, pressure = _loads(state.dofmap, problem)
    c_v, c_w = _coupling_residual(state, variant)
    r_v = -(a_v @ state.v.coefficients) + c_v + dirac
    r_w = a_w @ state.w.coefficients + c_w - pressure
    return np.concatenate([r_v, r_w])


def assemble_jacobian(state: PlateState, problem: PlateProblem) -> sp.csr_matrix:
    """Exact derivative of ``assemble_residual`` as a 2×2 block CSR matrix."""
    variant = _check_variant(problem)
    a_v, a_w = _operators(state, problem)
    j_vw, j_wv, j_ww = _coupling_jacobian(state, variant)
    return sp.bmat([[-a_v, j_vw], [j_wv, a_w + j_ww]], format="csr")


@track_performance("assembly")
def assemble_system(state: PlateState, problem: PlateProblem, with_jacobian: bool = True) -> AssembledSystem:
    residual = assemble_residual(state, problem)
    jacobian = assemble_jacobian(state, problem) if with_jacobian else None
    return AssembledSystem(residual=residual, jacobian=jacobian, n_free=state.dofmap.n_free)


def evaluate_functional(state: PlateState, problem: PlateProblem) -> float:
    """
    Discrete functional I at ``state``, integrated directly by quadrature.

    The value does not depend on ``problem.variant``.
    """
    dofmap = state.dofmap
    cells, edges = dofmap.cell_tables(), dofmap.edge_tables()
    cv, cw, ev, ew = _state_data(state)
    c_nu, alpha = problem.c_nu, problem.alpha
    wts = cells.weights

    hv2 = np.einsum("tqij,tqij->tq", cv["hess"], cv["hess"])
    hw2 = np.einsum("tqij,tqij->tq", cw["hess"], cw["hess"])
    coupling = np.einsum("tqi,tqij,tqj->tq", cw["grad"], cof(cv["hess"]), cw["grad"])
    p = problem.evaluate_load(cells.points.reshape(-1, 2)).reshape(wts.shape)
    cell_total = np.sum(wts * (-0.5 * hv2 + 0.5 * coupling + 0.5 * c_nu * hw2 - problem.load_factor * p * cw["value"]))

    def l1(data):
        return -np.sum(edges.weights * data["jump_n"] * data["avg_nn"])

    def l2(data):
        return 0.5 * alpha * np.sum(edges.weights * edges.penalty[:, None] * data["jump_n"] ** 2)

    wts_in = edges.weights * edges.interior[:, None]
    edge_coupling = -0.5 * np.sum(wts_in * ew["avg_t"] ** 2 * ev["jump_n"])

    source = 0.0
    if len(problem.disclinations):
        for y, s in zip(problem.disclinations.positions, problem.disclinations.angles):
            source += s * evaluate(state.v, y)
        source *= problem.source_factor

    return float(cell_total + c_nu * l1(ew) + l2(ew) - l1(ev) - l2(ev) + edge_coupling + source)


def system_statistics(dofmap: DofMap, jacobian: Optional[sp.spmatrix] = None) -> Dict[str, Any]:
    """Mesh and system sizes as reported in run manifests."""
    mesh = dofmap.mesh
    n = 2 * dofmap.n_free
    stats: Dict[str, Any] = {
        "nodes": mesh.n_vertices,
        "elements": mesh.n_triangles,
        "edges": mesh.n_edges,
        "dofs_per_field": dofmap.n_dofs,
        "free_dofs_per_field": dofmap.n_free,
        "unknowns": n,
    }
    if jacobian is not None:
        nnz = int(jacobian.nnz)
        stats.update({
            "jacobian_shape": list(jacobian.shape),
            "jacobian_nnz": nnz,
            "sparsity_percent": 100.0 * (1.0 - nnz / float(n * n)) if n else 0.0,
        })
    return stats
