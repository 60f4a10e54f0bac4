"""
Element tests: cubic basis, quadrature exactness and the affine chain rule.
"""

import sys
from pathlib import Path

import numpy as np

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.errors import GeometryError
from src.fem import element


def test_basis_is_nodal():
    nodes = element.reference_element().nodes
    for k, node in enumerate(nodes):
        values, _, _ = element.eval_basis(node)
        expected = np.zeros(10)
        expected[k] = 1.0
        assert np.allclose(values, expected, atol=1e-12)


def test_partition_of_unity():
    values, grads, hess = element.eval_basis([1 / 3, 1 / 3])
    assert np.isclose(values.sum(), 1.0)
    assert np.allclose(grads.sum(axis=0), 0.0, atol=1e-12)
    assert np.allclose(hess.sum(axis=0), 0.0, atol=1e-10)


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(3)
    step = 1e-6
    for _ in range(5):
        x, y = rng.uniform(0.05, 0.45, size=2)
        _, grads, hess = element.eval_basis([x, y])
        for axis in range(2):
            offset = np.zeros(2)
            offset[axis] = step
            plus, grad_plus, _ = element.eval_basis(np.array([x, y]) + offset)
            minus, grad_minus, _ = element.eval_basis(np.array([x, y]) - offset)
            assert np.allclose((plus - minus) / (2 * step), grads[:, axis], atol=1e-8)
            assert np.allclose((grad_plus - grad_minus) / (2 * step), hess[:, :, axis], atol=1e-6)


def test_batched_tabulation_shapes():
    values, grads, hess = element.eval_basis(np.array([[0.2, 0.3], [0.1, 0.1], [0.6, 0.2]]))
    assert values.shape == (3, 10)
    assert grads.shape == (3, 10, 2)
    assert hess.shape == (3, 10, 2, 2)


def test_cell_quadrature_exactness():
    rule = element.cell_quadrature()
    assert rule.degree >= 6
    assert np.isclose(rule.integrate(lambda p: np.ones(len(p))), 0.5)
    assert np.isclose(rule.integrate(lambda p: p[:, 0] ** 3 * p[:, 1] ** 3), 1.0 / 1120.0, rtol=1e-9)
    # ∫ x^a y^b = a! b! / (a + b + 2)!
    assert np.isclose(rule.integrate(lambda p: p[:, 0] ** 6), 720.0 / 40320.0, rtol=1e-9)
    assert np.isclose(rule.integrate(lambda p: p[:, 0] ** 2 * p[:, 1] ** 4), 2.0 * 24.0 / 40320.0, rtol=1e-9)


def test_edge_quadrature_exactness():
    rule = element.edge_quadrature()
    assert rule.degree >= 7
    assert np.isclose(rule.integrate(lambda s: s ** 7), 1.0 / 8.0)
    assert np.isclose(rule.integrate(lambda s: np.ones_like(s)), 1.0)


def test_identity_map():
    mapping = element.AffineMap.from_jacobian(np.eye(2))
    _, grads, hess = element.eval_basis([0.3, 0.2])
    g, h = element.physical_derivatives(grads, hess, mapping)
    assert np.allclose(g, grads)
    assert np.allclose(h, hess)


def test_scaling_map():
    s = 0.25
    mapping = element.AffineMap.from_jacobian(s * np.eye(2))
    _, grads, hess = element.eval_basis([0.3, 0.2])
    g, h = element.physical_derivatives(grads, hess, mapping)
    assert np.allclose(g, grads / s)
    assert np.allclose(h, hess / s ** 2)


def test_random_map_against_finite_differences():
    corners = np.array([[0.1, -0.2], [1.3, 0.1], [0.4, 0.9]])
    mapping = element.AffineMap.from_triangle(corners)
    coeffs = np.random.default_rng(7).standard_normal(10)

    def u(x):
        ref = mapping.inverse @ (np.asarray(x) - mapping.origin)
        values, _, _ = element.eval_basis(ref)
        return values @ coeffs

    ref = np.array([0.25, 0.35])
    x = mapping.origin + mapping.jacobian @ ref
    _, grads, hess = element.eval_basis(ref)
    g, h = element.physical_derivatives(grads, hess, mapping)
    step = 1e-4
    for axis in range(2):
        e = np.zeros(2)
        e[axis] = step
        d = 0.1 * e
        assert np.isclose((u(x + d) - u(x - d)) / (0.2 * step), coeffs @ g[:, axis], atol=1e-7)
        second = (u(x + e) - 2 * u(x) + u(x - e)) / step ** 2
        assert np.isclose(second, coeffs @ h[:, axis, axis], rtol=1e-5, atol=1e-5)


def test_batched_maps_match_single_maps():
    corners = np.array([
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        [[0.2, 0.1], [0.9, 0.3], [0.1, 0.8]],
    ])
    batched = element.AffineMap.from_triangle(corners)
    _, grads, hess = element.eval_basis(np.array([[0.2, 0.2], [0.5, 0.1]]))
    g_b, h_b = element.physical_derivatives(
        np.broadcast_to(grads, (2,) + grads.shape), np.broadcast_to(hess, (2,) + hess.shape), batched,
    )
    for t in range(2):
        single = element.AffineMap.from_triangle(corners[t])
        g, h = element.physical_derivatives(grads, hess, single)
        assert np.allclose(g_b[t], g)
        assert np.allclose(h_b[t], h)


def test_degenerate_map_rejected():
    try:
        element.AffineMap.from_triangle([[0, 0], [1, 1], [2, 2]])
    except GeometryError:
        return
    raise AssertionError("degenerate map accepted")


def main() -> bool:
    tests = [
        test_basis_is_nodal,
        test_partition_of_unity,
        test_gradients_match_finite_differences,
        test_batched_tabulation_shapes,
        test_cell_quadrature_exactness,
        test_edge_quadrature_exactness,
        test_identity_map,
        test_scaling_map,
        test_random_map_against_finite_differences,
        test_batched_maps_match_single_maps,
        test_degenerate_map_rejected,
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
