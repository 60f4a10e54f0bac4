"""
Forms tests: DG operator, loads, residual/Jacobian consistency and the functional.
"""

import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.analytic import test2_exact
from src.errors import ParameterError
from src.fem import forms
from src.fem import Field, PlateState, build_dofmap, generate_disc_mesh, interpolate
from src.models import DisclinationSet, FormulationVariant, PlateProblem, uniform_load
from tests.acceptance import gradient_error, jacobian_error, random_state


@lru_cache(maxsize=None)
def disc(h: float = 0.3):
    mesh = generate_disc_mesh(h)
    return mesh, build_dofmap(mesh)


def _problem(variant="var", **changes) -> PlateProblem:
    data = dict(
        beta=10.0, gamma=1e-2, variant=variant,
        load=lambda p: np.cos(p[..., 0]) + p[..., 1],
        disclinations=test2_exact(10.0, (0.3, 0.1)).disclinations,
    )
    data.update(changes)
    return PlateProblem(**data)


def test_operator_symmetric_and_coercive():
    mesh, dofmap = disc()
    matrix = forms.assemble_biharmonic_dg(mesh, dofmap, 300.0, 1.0)
    assert abs(matrix - matrix.T).max() <= 1e-10 * abs(matrix).max()
    x = np.random.default_rng(0).standard_normal(dofmap.n_free)
    assert x @ (matrix @ x) > 0


def test_operator_scale_and_cache():
    mesh, dofmap = disc()
    plain = forms.assemble_biharmonic_dg(mesh, dofmap, 300.0, 1.0)
    assert forms.assemble_biharmonic_dg(mesh, dofmap, 300.0, 1.0) is plain
    scaled = forms.assemble_biharmonic_dg(mesh, dofmap, 300.0, 0.5)
    assert abs(scaled - scaled.T).max() <= 1e-10 * abs(scaled).max()
    assert abs(scaled - plain).max() > 0


def test_operator_rejects_bad_input():
    mesh, dofmap = disc()
    other_mesh, _ = disc(0.35)
    for args in ((mesh, dofmap, 0.0), (other_mesh, dofmap, 300.0)):
        try:
            forms.assemble_biharmonic_dg(*args)
        except ParameterError:
            continue
        raise AssertionError(f"accepted {args[2]}")


def test_dirac_load_locality():
    mesh, dofmap = disc()
    assert np.all(forms.assemble_dirac_load(dofmap, DisclinationSet(), 10.0) == 0.0)
    centroid = mesh.centroids[20]
    load = forms.assemble_dirac_load(dofmap, DisclinationSet(((centroid[0], centroid[1]),), (1.0,)), 10.0)
    assert 0 < np.count_nonzero(load) <= 10


def test_dirac_load_antisymmetric_under_point_reflection():
    _, dofmap = disc()
    coords = dofmap.dof_coordinates[dofmap.free_dofs]
    _, mirror = cKDTree(coords).query(-coords)
    assert np.allclose(coords[mirror], -coords, atol=1e-10)
    load = forms.assemble_dirac_load(dofmap, test2_exact(10.0, (0.3, 0.1)).disclinations, 10.0)
    assert np.allclose(load[mirror], -load, atol=1e-10)


def test_pressure_load():
    mesh, dofmap = disc()
    assert np.all(forms.assemble_pressure_load(dofmap, uniform_load(0.0), 1.0) == 0.0)
    full = forms.assemble_pressure_load(dofmap, uniform_load(1.0), 2.0, full=True)
    n = int(mesh.boundary_flags.sum())
    polygon_area = 0.5 * n * np.sin(2 * np.pi / n)
    assert np.isclose(full.sum(), 2.0 * polygon_area)
    up = forms.assemble_pressure_load(dofmap, uniform_load(1.0), 1.0)
    down = forms.assemble_pressure_load(dofmap, uniform_load(-1.0), 1.0)
    assert np.allclose(down, -up)


def test_residual_at_zero_state():
    _, dofmap = disc()
    zero = PlateState.zeros(dofmap)
    unloaded = PlateProblem(beta=10.0, gamma=1e-4)
    assert np.all(forms.assemble_residual(zero, unloaded) == 0.0)

    pressed = PlateProblem(beta=10.0, gamma=1e-4, load=uniform_load(-1.0))
    residual = forms.assemble_residual(zero, pressed)
    n = dofmap.n_free
    assert np.all(residual[:n] == 0.0)
    assert np.allclose(residual[n:], -forms.assemble_pressure_load(dofmap, uniform_load(-1.0), 1.0))


def test_residual_is_gradient_of_functional():
    _, dofmap = disc()
    rng = np.random.default_rng(11)
    problem = _problem()
    for _ in range(10):
        state = random_state(dofmap, rng)
        for _ in range(10):
            direction = rng.standard_normal(2 * dofmap.n_free)
            assert gradient_error(state, problem, direction) < 1e-6


def test_jacobian_matches_finite_differences():
    _, dofmap = disc()
    rng = np.random.default_rng(12)
    for _ in range(10):
        state = random_state(dofmap, rng)
        directions = rng.standard_normal((10, 2 * dofmap.n_free))
        for variant in FormulationVariant:
            problem = _problem(variant)
            for direction in directions:
                assert jacobian_error(state, problem, direction) < 1e-5, variant


def test_var_jacobian_symmetric():
    _, dofmap = disc()
    state = random_state(dofmap, np.random.default_rng(13))
    jac = forms.assemble_jacobian(state, _problem())
    assert abs(jac - jac.T).max() <= 1e-9 * abs(jac).max()


def test_residual_independent_of_edge_labels():
    mesh, dofmap = disc()
    flipped = build_dofmap(mesh.relabeled())
    assert np.array_equal(flipped.cell_dofs, dofmap.cell_dofs)
    x = random_state(dofmap, np.random.default_rng(14)).to_vector()
    for variant in FormulationVariant:
        problem = _problem(variant)
        a = forms.assemble_residual(PlateState.from_vector(dofmap, x), problem)
        b = forms.assemble_residual(PlateState.from_vector(flipped, x), problem)
        assert np.allclose(a, b, rtol=1e-10, atol=1e-10 * np.abs(a).max()), variant


def test_variants_agree_without_deflection():
    _, dofmap = disc()
    rng = np.random.default_rng(15)
    state = PlateState(Field(dofmap, rng.standard_normal(dofmap.n_free)), Field.zeros(dofmap))
    reference = forms.assemble_residual(state, _problem("var"))
    for variant in ("bnrs17", "cmn18"):
        assert np.allclose(forms.assemble_residual(state, _problem(variant)), reference)


def test_functional_values():
    mesh, dofmap = disc()
    zero = PlateState.zeros(dofmap)
    unloaded = PlateProblem(beta=10.0, gamma=1e-2)
    assert forms.evaluate_functional(zero, unloaded) == 0.0

    bump = interpolate(mesh, dofmap, lambda p: (1 - np.sum(p ** 2, axis=-1)) ** 2)
    bending = forms.evaluate_functional(PlateState(Field.zeros(dofmap), bump), unloaded)
    a_w = forms.assemble_biharmonic_dg(mesh, dofmap, unloaded.alpha, unloaded.c_nu)
    assert bending > 0
    assert np.isclose(bending, 0.5 * bump.coefficients @ (a_w @ bump.coefficients))

    v = Field(dofmap, np.random.default_rng(16).standard_normal(dofmap.n_free))
    once = forms.evaluate_functional(PlateState(v, Field.zeros(dofmap)), unloaded)
    twice = forms.evaluate_functional(PlateState(2.5 * v, Field.zeros(dofmap)), unloaded)
    assert np.isclose(twice, 2.5 ** 2 * once)


def test_system_statistics():
    mesh, dofmap = disc()
    state = random_state(dofmap, np.random.default_rng(17))
    stats = forms.system_statistics(dofmap, forms.assemble_jacobian(state, _problem()))
    assert stats["nodes"] == mesh.n_vertices
    assert stats["elements"] == mesh.n_triangles
    assert stats["unknowns"] == 2 * dofmap.n_free
    assert 0 < stats["sparsity_percent"] < 100


def main() -> bool:
    tests = [
        test_operator_symmetric_and_coercive,
        test_operator_scale_and_cache,
        test_operator_rejects_bad_input,
        test_dirac_load_locality,
        test_dirac_load_antisymmetric_under_point_reflection,
        test_pressure_load,
        test_residual_at_zero_state,
        test_residual_is_gradient_of_functional,
        test_jacobian_matches_finite_differences,
        test_var_jacobian_symmetric,
        test_residual_independent_of_edge_labels,
        test_variants_agree_without_deflection,
        test_functional_values,
        test_system_statistics,
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
