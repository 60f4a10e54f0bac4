"""
Damped Newton iteration, parameter continuation and the linear
Kirchhoff-Love reductions.

The functional is a saddle (concave in v), so step acceptance uses the
residual 2-norm as merit: a step is halved until ‖R‖ decreases.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..callbacks import FailureCallback, FailureEvent, IterationCallback, IterationEvent
from ..errors import LinearAlgebraError, ParameterError
from ..fem.forms import assemble_biharmonic_dg, assemble_dirac_load, assemble_jacobian, assemble_pressure_load, assemble_residual
from ..fem.space import DofMap, Field, PlateState
from ..models.problem import FormulationVariant, PlateProblem
from ..models.report import SolverReport
from ..models.run import SolverConfig
from ..performance import track_performance
from .linalg import sparse_lu_solve

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


def _load_norm(dofmap: DofMap, problem: PlateProblem) -> float:
    """‖b‖ of the state-independent right-hand sides (Dirac and pressure loads)."""
    dirac = assemble_dirac_load(dofmap, problem.disclinations, problem.beta)
    pressure = assemble_pressure_load(dofmap, problem.load, problem.load_factor)
    return float(np.hypot(np.linalg.norm(dirac), np.linalg.norm(pressure)))


@track_performance("newton")
def newton_solve(
    problem: PlateProblem,
    initial_state: PlateState,
    config: Optional[SolverConfig] = None,
    on_iteration: Optional[IterationCallback] = None,
    on_failure: Optional[FailureCallback] = None,
    run_id: str = "run",
) -> Tuple[PlateState, SolverReport]:
    """
    Solve R(v, w) = 0 from ``initial_state``.

    Stops when ‖R‖ ≤ max(abs_tol, rel_tol·‖R₀‖) after at least one step.
    Two stagnation tests also count as convergence: ‖R‖ at the round-off
    floor roundoff_factor·ε·(‖|J||x|‖ + ‖b‖), where no step can reduce it
    further, and a Newton update below step_tol·(1 + ‖x‖).
    Non-convergence is reported in the returned ``SolverReport``; the state
    returned is the last accepted iterate.
    """
    config = config or SolverConfig()
    dofmap = initial_state.dofmap
    symmetric = problem.variant is FormulationVariant.VAR

    x = initial_state.to_vector()
    residual = assemble_residual(initial_state, problem)
    norm = float(np.linalg.norm(residual))
    tol = max(config.abs_tol, config.rel_tol * norm)
    load_norm = _load_norm(dofmap, problem)
    report = SolverReport(residual_history=[norm])
    logger.debug("[%s] newton start: |R0|=%.3e tol=%.3e", run_id, norm, tol)

    for iteration in range(1, config.max_iters + 1):
        state = PlateState.from_vector(dofmap, x)
        jacobian = assemble_jacobian(state, problem)
        try:
            step = sparse_lu_solve(jacobian, -residual, symmetric=symmetric)
        except LinearAlgebraError as e:
            report.reason = "singular_jacobian"
            report.singular_pivot = e.pivot
            logger.warning("[%s] singular Jacobian at iteration %d: %s", run_id, iteration, e)
            break

        x_norm = float(np.linalg.norm(x))
        floor = config.roundoff_factor * _EPS * (float(np.linalg.norm(abs(jacobian) @ np.abs(x))) + load_norm)
        report.residual_floor = floor
        negligible = float(np.linalg.norm(step)) <= config.step_tol * (1.0 + x_norm)

        damping = config.initial_damping
        accepted = False
        for _ in range(config.max_halvings + 1):
            trial = x + damping * step
            trial_residual = assemble_residual(PlateState.from_vector(dofmap, trial), problem)
            trial_norm = float(np.linalg.norm(trial_residual))
            if np.isfinite(trial_norm) and (trial_norm < norm or trial_norm <= tol):
                accepted = True
                break
            damping *= config.backtrack_factor
        if not accepted:
            if norm <= floor or negligible:
                report.converged = True
                report.stop_criterion = "roundoff" if norm <= floor else "step"
                logger.debug("[%s] no further decrease at |R|=%.3e (floor %.3e)", run_id, norm, floor)
                break
            report.reason = "line_search"
            logger.warning("[%s] backtracking exhausted at iteration %d (|R|=%.3e)", run_id, iteration, norm)
            break

        step_norm = damping * float(np.linalg.norm(step))
        x, residual, norm = trial, trial_residual, trial_norm
        report.iterations = iteration
        report.residual_history.append(norm)
        report.step_norms.append(step_norm)
        report.damping_history.append(damping)
        if on_iteration is not None:
            on_iteration(IterationEvent(
                run_id=run_id, iteration=iteration, residual_norm=norm,
                step_norm=step_norm, damping=damping,
            ))
        logger.debug("[%s] iter %d: |R|=%.3e step=%.3e damping=%.3g", run_id, iteration, norm, step_norm, damping)

        criterion = "residual" if norm <= tol else "roundoff" if norm <= floor else "step" if negligible else None
        if criterion is not None:
            report.converged = True
            report.stop_criterion = criterion
            break
    else:
        report.reason = "max_iters"

    if not report.converged:
        logger.info("[%s] newton stopped without convergence: %s", run_id, report.reason)
        if on_failure is not None:
            on_failure(FailureEvent(
                run_id=run_id, reason=report.reason or "unknown",
                iterations=report.iterations, residual_history=list(report.residual_history),
            ))
    else:
        logger.info("[%s] newton converged in %d iterations (%s), |R|=%.3e",
                    run_id, report.iterations, report.stop_criterion, norm)
    return PlateState.from_vector(dofmap, x), report


def continuation_solve(
    problem: PlateProblem,
    ramp: Sequence[float],
    config: Optional[SolverConfig] = None,
    initial_state: Optional[PlateState] = None,
    dofmap: Optional[DofMap] = None,
    parameter: str = "gamma",
    on_iteration: Optional[IterationCallback] = None,
    on_failure: Optional[FailureCallback] = None,
    run_id: str = "run",
) -> Tuple[PlateState, SolverReport, List[float]]:
    """
    Solve along a monotone ramp of γ (or β), warm-starting each step.

    Returns the last converged state, the merged report and the parameter
    values that converged. A failing step stops the ramp.
    """
    ramp = [float(value) for value in ramp]
    if not ramp:
        raise ParameterError("continuation ramp is empty")
    if parameter not in ("gamma", "beta"):
        raise ParameterError(f"cannot ramp {parameter!r}")
    steps = np.diff(ramp)
    if len(steps) and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ParameterError("continuation ramp must be strictly monotone")
    if initial_state is None:
        if dofmap is None:
            raise ParameterError("continuation needs an initial state or a dofmap")
        initial_state = PlateState.zeros(dofmap)

    state = initial_state
    report = SolverReport()
    completed: List[float] = []
    for k, value in enumerate(ramp):
        step_problem = problem.with_params(**{parameter: value})
        trial, step_report = newton_solve(
            step_problem, state, config, on_iteration=on_iteration, on_failure=on_failure,
            run_id=f"{run_id}/{parameter}={value:.4g}",
        )
        step_report.continuation_steps = 1
        report = report.merge(step_report)
        if not step_report.converged:
            report.reason = f"continuation step {k} ({parameter}={value:.4g}): {step_report.reason}"
            break
        state = trial
        completed.append(value)
    return state, report, completed


def continuation_ramp(target: float, steps: int, start: Optional[float] = None) -> List[float]:
    """Geometric ramp ending at ``target`` (linear when ``start`` is 0)."""
    if steps <= 1:
        return [float(target)]
    if start is None:
        start = target / 10.0 ** (steps - 1) ** 0.5
    if start == 0 or np.sign(start) != np.sign(target):
        return list(np.linspace(target / steps, target, steps))
    return list(np.geomspace(start, target, steps))


def solve_kl_membrane(dofmap: DofMap, problem: PlateProblem) -> Field:
    """Airy function of the Kirchhoff-Love membrane problem Δ²v = β²θ (w ≡ 0)."""
    a_v = assemble_biharmonic_dg(dofmap.mesh, dofmap, problem.alpha, 1.0)
    rhs = assemble_dirac_load(dofmap, problem.disclinations, problem.beta)
    return Field(dofmap, sparse_lu_solve(a_v, rhs, symmetric=True))


def solve_kl_bending(dofmap: DofMap, problem: PlateProblem) -> Field:
    """Deflection of the Kirchhoff-Love bending problem c_νΔ²w = γβ⁴p (v ≡ 0)."""
    a_w = assemble_biharmonic_dg(dofmap.mesh, dofmap, problem.alpha, problem.c_nu)
    rhs = assemble_pressure_load(dofmap, problem.load, problem.load_factor)
    return Field(dofmap, sparse_lu_solve(a_w, rhs, symmetric=True))
