"""
Energy terms of a plate state and percentage errors against references.
"""

import logging
from typing import Iterable, Optional, Tuple

import numpy as np

from ..fem.forms import bracket, cof
from ..fem.space import DofMap, Field, PlateState, evaluate
from ..models.problem import PlateProblem
from ..models.report import EnergyBreakdown, EnergyErrors
from ..performance import track_performance

logger = logging.getLogger(__name__)

ENERGY_TERMS = ("bending", "membrane", "coupling")


def _cell_quantities(field: Field):
    """Value, gradient and Hessian of ``field`` at every cell quadrature point."""
    cells = field.dofmap.cell_tables()
    c = field.local()
    return (
        np.einsum("qm,tm->tq", cells.values, c),
        np.einsum("tqmi,tm->tqi", cells.grads, c),
        np.einsum("tqmij,tm->tqij", cells.hess, c),
    )


def hessian_energy(field: Field) -> float:
    """½ Σ_T ∫ |∇²u|²."""
    _, _, hess = _cell_quantities(field)
    weights = field.dofmap.cell_tables().weights
    return 0.5 * float(np.sum(weights * np.einsum("tqij,tqij->tq", hess, hess)))


def coupling_energy_bracket(state: PlateState) -> float:
    """Coupling energy written with the Monge-Ampère bracket, −½ Σ_T ∫ [w,w] v."""
    v_val, _, _ = _cell_quantities(state.v)
    _, _, w_hess = _cell_quantities(state.w)
    weights = state.dofmap.cell_tables().weights
    return -0.5 * float(np.sum(weights * bracket(w_hess, w_hess) * v_val))


@track_performance("post")
def compute_energies(state: PlateState, problem: PlateProblem) -> EnergyBreakdown:
    """Cellwise quadrature of the membrane, bending and coupling energies and the load work."""
    cells = state.dofmap.cell_tables()
    weights = cells.weights
    _, _, v_hess = _cell_quantities(state.v)
    w_val, w_grad, _ = _cell_quantities(state.w)

    coupling = 0.5 * np.einsum("tq,tqi,tqij,tqj->", weights, w_grad, cof(v_hess), w_grad)
    p = problem.evaluate_load(cells.points.reshape(-1, 2)).reshape(weights.shape)
    dirac = sum(s * evaluate(state.v, y) for y, s in zip(problem.disclinations.positions, problem.disclinations.angles))

    return EnergyBreakdown(
        membrane=hessian_energy(state.v),
        bending=problem.c_nu * hessian_energy(state.w),
        coupling=float(coupling),
        dirac_work=float(problem.source_factor * dirac),
        pressure_work=float(problem.load_factor * np.sum(weights * p * w_val)),
        coupling_bracket=coupling_energy_bracket(state),
    )


def percentage_error(computed: float, exact: float) -> Optional[float]:
    """100·(computed − exact)/exact, ``None`` for a zero reference."""
    if exact == 0.0 or not np.isfinite(exact):
        return None
    return 100.0 * (computed - exact) / exact


def energy_errors(
    computed: EnergyBreakdown,
    exact: EnergyBreakdown,
    terms: Iterable[str] = ENERGY_TERMS,
) -> EnergyErrors:
    """Percentage errors e_b, e_m, e_c; terms with a zero reference are flagged undefined."""
    errors = EnergyErrors()
    for name in terms:
        value = percentage_error(getattr(computed, name), getattr(exact, name))
        if value is None:
            errors.undefined.append(name)
            logger.debug("percentage error of %s is undefined (zero reference)", name)
        setattr(errors, name, value)
    return errors


def bracket_identity_integrals(dofmap: DofMap, phi, chi, eta) -> Tuple[float, float, float]:
    """
    ∫ cof(∇²φ):(∇χ⊗∇η), −∫ [χ,η] φ and −∫ [φ,η] χ by cell quadrature.

    Each argument maps points (..., 2) to (value, gradient, Hessian). The
    three integrals agree when φ and ∇φ vanish on the boundary.
    """
    cells = dofmap.cell_tables()
    points, weights = cells.points, cells.weights
    phi_val, _, phi_hess = phi(points)
    chi_val, chi_grad, chi_hess = chi(points)
    _, eta_grad, eta_hess = eta(points)
    first = np.einsum("tq,tqij,tqi,tqj->", weights, cof(phi_hess), chi_grad, eta_grad)
    second = -np.sum(weights * bracket(chi_hess, eta_hess) * phi_val)
    third = -np.sum(weights * bracket(phi_hess, eta_hess) * chi_val)
    return float(first), float(second), float(third)
