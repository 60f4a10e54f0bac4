"""
Solver tests: sparse LU, damped Newton, continuation and the linear reductions.
"""

import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.sparse as sp

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.analytic import green_disc, test1_exact, test2_exact
from src.errors import LinearAlgebraError, ParameterError
from src.fem import (
    PlateState, assemble_biharmonic_dg, assemble_residual, build_dofmap, evaluate, evaluate_functional,
    generate_disc_mesh,
)
from src.models import DisclinationSet, FormulationVariant, PlateProblem, SolverConfig, uniform_load
from src.post import compute_energies
from src.solver import linalg
from src.solver import (
    continuation_ramp, continuation_solve, newton_solve, solve_kl_bending, solve_kl_membrane, sparse_lu_solve,
)


@lru_cache(maxsize=None)
def disc(h: float = 0.3):
    mesh = generate_disc_mesh(h)
    return mesh, build_dofmap(mesh)


def test_lu_small_systems():
    assert np.allclose(sparse_lu_solve(sp.identity(4), np.arange(4.0)), np.arange(4.0))
    x = sparse_lu_solve(sp.csr_matrix([[2.0, 1.0], [1.0, 3.0]]), [3.0, 4.0], symmetric=True)
    assert np.allclose(x, [1.0, 1.0])


def test_lu_matches_dense_solve():
    mesh, dofmap = disc()
    matrix = assemble_biharmonic_dg(mesh, dofmap, 300.0, 1.0)
    rhs = np.random.default_rng(2).standard_normal(dofmap.n_free)
    expected = np.linalg.solve(matrix.toarray(), rhs)
    for symmetric in (False, True):
        assert np.allclose(sparse_lu_solve(matrix, rhs, symmetric=symmetric), expected, rtol=1e-8, atol=1e-12)


def test_lu_reports_singular_pivot():
    try:
        sparse_lu_solve(sp.csr_matrix([[1.0, 0.0], [0.0, 0.0]]), [1.0, 1.0])
    except LinearAlgebraError as e:
        assert e.pivot == 1
    else:
        raise AssertionError("empty row accepted")

    try:
        sparse_lu_solve(sp.csr_matrix([[1.0, 2.0], [2.0, 4.0]]), [1.0, 1.0])
    except LinearAlgebraError as e:
        assert e.pivot is not None
    else:
        raise AssertionError("rank-deficient matrix accepted")


def test_lu_rejects_shape_mismatch():
    for matrix, rhs in ((sp.csr_matrix(np.ones((2, 3))), [1.0, 1.0]), (sp.identity(2), [1.0, 1.0, 1.0])):
        try:
            sparse_lu_solve(matrix, rhs)
        except LinearAlgebraError:
            continue
        raise AssertionError("shape mismatch accepted")


def test_newton_zero_problem():
    _, dofmap = disc()
    state, report = newton_solve(PlateProblem(beta=10.0, gamma=1e-4), PlateState.zeros(dofmap))
    assert report.converged
    assert report.iterations == 1
    assert np.all(state.to_vector() == 0.0)


def test_newton_disclination_pair_keeps_plate_flat():
    _, dofmap = disc()
    exact = test2_exact(10.0, (0.3, 0.0))
    problem = PlateProblem(beta=10.0, gamma=1e-4, disclinations=exact.disclinations)
    events = []
    state, report = newton_solve(problem, PlateState.zeros(dofmap), on_iteration=events.append)
    assert report.converged
    assert len(events) == report.iterations
    assert len(report.residual_history) == report.iterations + 1
    assert np.abs(state.w.coefficients).max() <= 1e-12 * max(1.0, np.abs(state.v.coefficients).max())
    membrane = solve_kl_membrane(dofmap, problem)
    assert np.allclose(state.v.coefficients, membrane.coefficients, rtol=1e-8, atol=1e-10)


def test_newton_pressure_problem():
    _, dofmap = disc()
    problem = PlateProblem(beta=10.0, gamma=1e-4, load=uniform_load(-1.0), load_label="uniform")
    state, report = newton_solve(problem, PlateState.zeros(dofmap))
    assert report.converged
    assert report.final_residual <= max(1e-10, 1e-9 * report.residual_history[0], report.residual_floor)
    assert np.linalg.norm(assemble_residual(state, problem)) <= 1e-8
    assert evaluate(state.w, [0.0, 0.0]) < 0


def test_newton_reports_iteration_limit():
    _, dofmap = disc()
    problem = PlateProblem(beta=10.0, gamma=1e-2, load=uniform_load(-1.0))
    failures = []
    _, report = newton_solve(
        problem, PlateState.zeros(dofmap), SolverConfig(max_iters=1), on_failure=failures.append,
    )
    assert not report.converged
    assert report.reason == "max_iters"
    assert len(failures) == 1 and failures[0].reason == "max_iters"


def test_continuation_ramp():
    assert continuation_ramp(1e-2, 1) == [1e-2]
    ramp = continuation_ramp(1e-2, 4)
    assert len(ramp) == 4
    assert np.isclose(ramp[-1], 1e-2)
    assert np.all(np.diff(ramp) > 0)
    linear = continuation_ramp(2.0, 4, start=0)
    assert np.allclose(linear, [0.5, 1.0, 1.5, 2.0])


def test_continuation_single_step_matches_newton():
    _, dofmap = disc()
    problem = PlateProblem(beta=10.0, gamma=1e-3, load=uniform_load(-1.0))
    direct, _ = newton_solve(problem, PlateState.zeros(dofmap))
    ramped, report, completed = continuation_solve(problem, [1e-3], dofmap=dofmap)
    assert report.converged and completed == [1e-3]
    assert report.continuation_steps == 1
    assert np.allclose(ramped.to_vector(), direct.to_vector())


def test_continuation_reaches_target():
    _, dofmap = disc()
    problem = PlateProblem(beta=10.0, gamma=1e-2, load=uniform_load(-1.0))
    ramp = continuation_ramp(1e-2, 3)
    state, report, completed = continuation_solve(problem, ramp, dofmap=dofmap)
    assert report.converged
    assert len(completed) == 3 and report.continuation_steps == 3
    assert np.linalg.norm(assemble_residual(state, problem)) <= 1e-7


def test_continuation_rejects_bad_ramps():
    _, dofmap = disc()
    problem = PlateProblem(beta=10.0, gamma=1e-3)
    for ramp, parameter in (([], "gamma"), ([1e-3, 5e-4, 2e-3], "gamma"), ([1e-3], "nu")):
        try:
            continuation_solve(problem, ramp, dofmap=dofmap, parameter=parameter)
        except ParameterError:
            continue
        raise AssertionError(f"accepted ramp {ramp} over {parameter}")
    try:
        continuation_solve(problem, [1e-3])
    except ParameterError:
        return
    raise AssertionError("continuation without a starting point accepted")


def test_kl_bending_matches_clamped_plate():
    _, dofmap = disc(0.1)
    problem = PlateProblem(beta=10.0, gamma=1e-4, load=uniform_load(1.0))
    w = solve_kl_bending(dofmap, problem)
    # c_ν Δ²w = 1 on the unit disc gives w = (1 - r²)² / (64 c_ν)
    expected = 1.0 / (64.0 * problem.c_nu)
    assert np.isclose(evaluate(w, [0.0, 0.0]), expected, rtol=0.02)
    assert np.isclose(evaluate(w, [0.5, 0.0]), expected * 0.75 ** 2, rtol=0.02)


def test_kl_membrane_matches_green_function():
    _, dofmap = disc(0.1)
    problem = PlateProblem(beta=2.0, gamma=1e-4, disclinations=DisclinationSet(((0.0, 0.0),), (1.0,)))
    v = solve_kl_membrane(dofmap, problem)
    point = np.array([0.5, 0.0])
    expected = 4.0 * float(green_disc(point, (0.0, 0.0)))
    assert np.isclose(evaluate(v, point), expected, rtol=0.03)


def test_lu_symmetric_and_general_paths_agree():
    rng = np.random.default_rng(21)
    for n in (50, 200, 400):
        factor = sp.random(n, n, density=0.03, random_state=rng, format="csr")
        matrix = factor @ factor.T + sp.identity(n)
        rhs = rng.standard_normal(n)
        general = sparse_lu_solve(matrix, rhs)
        symmetric = sparse_lu_solve(matrix, rhs, symmetric=True)
        assert np.linalg.norm(general - symmetric) <= 1e-9 * np.linalg.norm(general)


def test_lu_column_ordering():
    calls = []
    original = linalg.splu

    def recording_splu(matrix, **options):
        calls.append(options)
        return original(matrix, **options)

    linalg.splu = recording_splu
    try:
        sparse_lu_solve(sp.identity(3), np.ones(3))
        sparse_lu_solve(sp.identity(3), np.ones(3), symmetric=True)
    finally:
        linalg.splu = original
    assert calls[0]["permc_spec"] == "COLAMD"
    assert calls[1]["permc_spec"] == "MMD_AT_PLUS_A"
    assert calls[1]["options"] == {"SymmetricMode": True}


def test_newton_converges_at_roundoff_floor():
    # tolerance below what double precision resolves on this system
    _, dofmap = disc()
    config = SolverConfig(abs_tol=1e-30, rel_tol=1e-30)
    for variant in (FormulationVariant.VAR, FormulationVariant.BNRS17):
        problem = PlateProblem(beta=10.0, gamma=1e-4, load=uniform_load(-1.0), variant=variant)
        state, report = newton_solve(problem, PlateState.zeros(dofmap), config)
        assert report.converged, (variant, report.residual_history)
        assert report.reason is None
        assert report.stop_criterion in ("roundoff", "step")
        assert report.final_residual <= report.residual_floor or report.stop_criterion == "step"
        assert report.iterations < config.max_iters
        direct, _ = newton_solve(problem, PlateState.zeros(dofmap))
        assert np.allclose(state.to_vector(), direct.to_vector(), rtol=1e-8, atol=1e-12)


def test_newton_test1_converges_quadratically():
    _, dofmap = disc(0.05)
    problem = PlateProblem(beta=100.0, gamma=100.0 ** -4, load=test1_exact().load, load_label="test1")
    _, report = newton_solve(problem, PlateState.zeros(dofmap))
    assert report.converged, report.residual_history
    assert report.reason is None
    # log-residual second differences over the last three norms above the floor
    tail = [r for r in report.residual_history if r > report.residual_floor][-3:]
    assert len(tail) == 3, report.residual_history
    logs = np.log(tail)
    assert logs[2] - 2.0 * logs[1] + logs[0] < 0.0, report.residual_history


def test_newton_residual_history_decreases():
    _, dofmap = disc()
    problem = PlateProblem(beta=10.0, gamma=1e-2, load=uniform_load(-1.0))
    _, report = newton_solve(problem, PlateState.zeros(dofmap))
    history = np.array(report.residual_history)
    assert len(history) == report.iterations + 1
    assert np.all(np.diff(history) < 0.0)
    assert all(0.0 < d <= 1.0 for d in report.damping_history)


def _ramp_problem(gamma: float) -> PlateProblem:
    return PlateProblem(beta=20.0, gamma=gamma, load=uniform_load(-1.0))


def test_continuation_reaches_nonlinear_regime():
    _, dofmap = disc()
    target = 1.875e-2
    state, report, completed = continuation_solve(_ramp_problem(target), continuation_ramp(target, 5), dofmap=dofmap)
    assert report.converged, report.reason
    assert len(completed) == 5 and np.isclose(completed[-1], target)

    # power law of the coupling energy fitted on two small loads
    small = []
    for gamma in (1e-5, 2e-5):
        solved, small_report = newton_solve(_ramp_problem(gamma), PlateState.zeros(dofmap))
        assert small_report.converged
        small.append(compute_energies(solved, _ramp_problem(gamma)).coupling)
    exponent = np.log(small[1] / small[0]) / np.log(2.0)
    extrapolated = small[0] * (target / 1e-5) ** exponent
    coupling = compute_energies(state, _ramp_problem(target)).coupling
    assert abs(coupling - extrapolated) > 0.1 * abs(extrapolated)


def test_continuation_round_trip():
    _, dofmap = disc()
    forward = [1e-5, 3e-5, 1e-4]
    target = _ramp_problem(forward[-1])
    first, report, _ = continuation_solve(target, forward, dofmap=dofmap)
    assert report.converged
    back, report, _ = continuation_solve(target, forward[-2::-1], initial_state=first)
    assert report.converged
    again, report, _ = continuation_solve(target, forward[1:], initial_state=back)
    assert report.converged
    energy = evaluate_functional(first, target)
    assert abs(evaluate_functional(again, target) - energy) <= 1e-6 * abs(energy)


def main() -> bool:
    tests = [
        test_lu_small_systems,
        test_lu_matches_dense_solve,
        test_lu_reports_singular_pivot,
        test_lu_rejects_shape_mismatch,
        test_lu_symmetric_and_general_paths_agree,
        test_lu_column_ordering,
        test_newton_zero_problem,
        test_newton_disclination_pair_keeps_plate_flat,
        test_newton_pressure_problem,
        test_newton_reports_iteration_limit,
        test_newton_converges_at_roundoff_floor,
        test_newton_test1_converges_quadratically,
        test_newton_residual_history_decreases,
        test_continuation_ramp,
        test_continuation_single_step_matches_newton,
        test_continuation_reaches_target,
        test_continuation_rejects_bad_ramps,
        test_continuation_reaches_nonlinear_regime,
        test_continuation_round_trip,
        test_kl_bending_matches_clamped_plate,
        test_kl_membrane_matches_green_function,
    ]

    passed = 0
    failed = 0
    for test in tests:
        try:
            test()
            passed += 1
            print(f"[PASS] {test.__name__}")
        except Exception as exc:
            failed += 1
            print(f"[FAIL] {test.__name__}: {exc}")

    print(f"summary: passed={passed}, failed={failed}")
    return failed == 0


if __name__ == "__main__":
    ok = main()
    sys.exit(0 if ok else 1)
