from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg

from dartfx.rbf.errors import (
    DimensionMismatchError,
    ExactnessError,
    IncompatibleSpaceError,
    InconsistentFunctionalError,
    InvalidNormalError,
)
from dartfx.rbf.functionals import DirectionalDerivativeAt, GradientComponentAt, LaplacianAt, PointEval
from dartfx.rbf.geometries import (
    EllipseSpec,
    GridByR,
    ellipse_nodes,
    ellipse_normal,
    ellipse_samples,
    grid_nodes,
    test_function,
    test_function_gradient,
)
from dartfx.rbf.kernels import KernelSpec, kernel_matrix
from dartfx.rbf.polynomials import NodeSet, PolySpace, eval_basis, vandermonde
from dartfx.rbf.recovery import (
    differentiation_weights,
    eval_interpolant,
    eval_interpolant_gradient,
    fit_interpolant,
    optimal_weights_qp,
    project_tangent,
    surface_gradient,
    surface_gradient_weights,
    worst_case_error,
)

SQRT2, SQRT3 = math.sqrt(2.0), math.sqrt(3.0)

# Laplacian at the origin on Z_{d,r} with K_{7,d} and cubic polynomials:
# (d, r) -> (|X|, dim N(P_X), dim N(P_X^T), E(w), ||w||_1, cond)
LAPLACIAN_ON_LATTICE = {
    (2, 1.0): (5, 5, 0, 13.4, 8.0, None),
    (2, SQRT2): (9, 2, 1, 10.6, 13.5, 2.0e2),
    (2, SQRT3): (9, 2, 1, 10.6, 13.5, 2.0e2),
    (2, 2.0): (13, 0, 3, 7.4, 11.8, 3.9e2),
    (3, 1.0): (7, 13, 0, 17.2, 12.0, None),
    (3, SQRT2): (19, 4, 3, 12.3, 22.7, 3.8e2),
    (3, SQRT3): (27, 3, 10, 12.4, 24.8, 2.5e3),
    (3, 2.0): (33, 0, 13, 9.0, 30.1, 5.1e3),
    (4, 1.0): (9, 26, 0, 20.8, 16.0, None),
    (4, SQRT2): (33, 8, 6, 14.0, 31.8, 5.7e2),
    (4, SQRT3): (65, 4, 34, 13.9, 39.7, 6.9e3),
    (4, 2.0): (89, 0, 54, 10.4, 40.5, 3.1e4),
    (5, 1.0): (11, 45, 0, 24.2, 20.0, None),
    (5, SQRT2): (51, 15, 10, 15.6, 40.9, 7.7e2),
    (5, SQRT3): (131, 5, 80, 15.4, 56.4, 1.3e4),
    (5, 2.0): (221, 0, 165, 11.7, 55.0, 9.0e4),
}


def laplacian_setup(d: int, r: float):
    nodes = grid_nodes(d, r)
    return nodes, LaplacianAt(np.zeros(d)), KernelSpec(s=7, d=d), PolySpace(d=d, q=4)


def relative_difference(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def test_five_point_stencil() -> None:
    for d in (2, 3, 4, 5):
        nodes, functional, kernel, space = laplacian_setup(d, 1.0)
        report = differentiation_weights(nodes, functional, kernel, space, prescale=GridByR(r=1.0))
        expected = np.ones(2 * d + 1)
        expected[0] = -2.0 * d
        np.testing.assert_allclose(report.weights, expected, atol=1e-9)
        assert report.cond is None
        assert report.dim_n_pxt == 0


def test_laplacian_on_lattice_balls() -> None:
    for (d, r), (size, dim_n, dim_nt, error, l1, cond) in LAPLACIAN_ON_LATTICE.items():
        nodes, functional, kernel, space = laplacian_setup(d, r)
        report = differentiation_weights(nodes, functional, kernel, space, prescale=GridByR())
        assert (nodes.n, report.dim_n_px, report.dim_n_pxt) == (size, dim_n, dim_nt), (d, r)
        assert report.error == pytest.approx(error, abs=0.05), (d, r)
        assert report.l1 == pytest.approx(l1, abs=0.05), (d, r)
        if cond is None:
            assert report.cond is None
        else:
            assert cond / 2 <= report.cond <= 2 * cond, (d, r, report.cond)


def test_solve_paths_agree() -> None:
    for d, r in LAPLACIAN_ON_LATTICE:
        nodes, functional, kernel, space = laplacian_setup(d, r)
        convention = GridByR()
        stacked = differentiation_weights(nodes, functional, kernel, space, prescale=convention).weights
        reduced = differentiation_weights(nodes, functional, kernel, space, prescale=convention, method="reduced").weights
        qp = optimal_weights_qp(nodes, functional, kernel, space, prescale=convention)
        assert relative_difference(reduced, stacked) <= 1e-6, (d, r)
        assert relative_difference(qp, stacked) <= 1e-6, (d, r)


def test_exact_on_conditional_kernel_sums() -> None:
    rng = np.random.default_rng(20)
    for r in (SQRT2, 2.0):
        nodes, functional, kernel, space = laplacian_setup(2, r)
        w = differentiation_weights(nodes, functional, kernel, space, prescale=GridByR()).weights
        K = kernel_matrix(kernel, nodes.points, nodes.points)
        P = vandermonde(space, nodes)
        M = scipy.linalg.null_space(P.T)
        a = functional.apply_kernel(kernel, nodes)
        b = functional.apply_basis(space)
        for _ in range(100):
            c = M @ rng.normal(size=M.shape[1])
            coefficients = rng.normal(size=space.m)
            values = K @ c + P @ coefficients
            exact = a @ c + b @ coefficients
            scale = 1.0 + abs(exact) + float(np.abs(w) @ np.abs(values))
            assert abs(exact - w @ values) <= 1e-8 * scale


def test_weights_minimise_worst_case_error() -> None:
    rng = np.random.default_rng(21)
    for d in (2, 3, 4, 5):
        for r in (SQRT2, SQRT3):
            nodes, functional, kernel, space = laplacian_setup(d, r)
            report = differentiation_weights(nodes, functional, kernel, space, prescale=GridByR())
            M = scipy.linalg.null_space(vandermonde(space, nodes).T)
            for _ in range(100):
                perturbed = report.weights + M @ (0.1 * rng.normal(size=M.shape[1]))
                assert report.error <= worst_case_error(nodes, perturbed, functional, kernel, space) + 1e-9


def test_worst_case_error_requires_exact_weights() -> None:
    nodes, functional, kernel, space = laplacian_setup(2, 1.0)
    with pytest.raises(ExactnessError):
        worst_case_error(nodes, np.ones(5), functional, kernel, space)
    with pytest.raises(DimensionMismatchError):
        worst_case_error(nodes, np.ones(4), functional, kernel, space)
    stencil = np.array([-4.0, 1.0, 1.0, 1.0, 1.0])
    assert worst_case_error(nodes, stencil, functional, kernel, space) == pytest.approx(13.4, abs=0.05)


def test_scale_covariance() -> None:
    nodes, functional, kernel, space = laplacian_setup(2, SQRT2)
    reference = differentiation_weights(nodes, functional, kernel, space).weights
    for h in (0.1, 10.0):
        scaled = NodeSet(points=h * nodes.points)
        weights = differentiation_weights(scaled, functional, kernel, space, prescale=True).weights
        assert relative_difference(weights, reference / h**2) <= 1e-7


def test_prescaled_and_direct_solves_agree() -> None:
    nodes, functional, kernel, space = laplacian_setup(2, 2.0)
    direct = differentiation_weights(nodes, functional, kernel, space).weights
    scaled = differentiation_weights(nodes, functional, kernel, space, prescale=GridByR(r=2.0)).weights
    assert relative_difference(scaled, direct) <= 1e-7


def test_weights_are_symmetric() -> None:
    for d, r in ((2, SQRT2), (3, SQRT3)):
        nodes, functional, kernel, space = laplacian_setup(d, r)
        w = differentiation_weights(nodes, functional, kernel, space, prescale=GridByR()).weights
        index = {tuple(p): i for i, p in enumerate(nodes.points.astype(int))}
        mirrored = np.array([w[index[tuple(-p)]] for p in nodes.points.astype(int)])
        np.testing.assert_allclose(w, mirrored, atol=1e-9)
        swapped = np.array([w[index[tuple(p[::-1])]] for p in nodes.points.astype(int)])
        np.testing.assert_allclose(w, swapped, atol=1e-9)


def test_poly_part_solves_first_block() -> None:
    nodes, functional, kernel, space = laplacian_setup(2, SQRT2)
    report = differentiation_weights(nodes, functional, kernel, space, prescale=GridByR(r=SQRT2))
    K = kernel_matrix(kernel, nodes.points, nodes.points)
    P = vandermonde(space, nodes)
    a = functional.apply_kernel(kernel, nodes)
    np.testing.assert_allclose(K @ report.weights + P @ report.poly_part, a, atol=1e-8 * np.abs(a).max())


def test_setup_errors() -> None:
    nodes, functional, kernel, space = laplacian_setup(2, 0.5)
    with pytest.raises(InconsistentFunctionalError):
        differentiation_weights(nodes, functional, kernel, space, prescale=GridByR(r=0.5))
    nodes, functional, kernel, _ = laplacian_setup(2, 2.0)
    with pytest.raises(IncompatibleSpaceError):
        differentiation_weights(nodes, functional, kernel, PolySpace(d=2, q=3))
    with pytest.raises(DimensionMismatchError):
        differentiation_weights(nodes, LaplacianAt(np.zeros(3)), kernel, PolySpace(d=2, q=4))


def test_gradient_weights() -> None:
    nodes = grid_nodes(2, 2.0)
    kernel, space = KernelSpec(s=7, d=2), PolySpace(d=2, q=4)
    functional = GradientComponentAt([0.25, -0.5], 0)
    report = differentiation_weights(nodes, functional, kernel, space, prescale=True)
    P = vandermonde(space, nodes)
    np.testing.assert_allclose(P.T @ report.weights, functional.apply_basis(space), atol=1e-9)
    assert report.error is not None and report.error > 0
    qp = optimal_weights_qp(nodes, functional, kernel, space, prescale=True)
    assert relative_difference(qp, report.weights) <= 1e-6


def test_point_evaluation_weights_interpolate() -> None:
    nodes = grid_nodes(2, SQRT2)
    kernel, space = KernelSpec(s=5, d=2), PolySpace(d=2, q=3)
    x = np.array([0.3, 0.45])
    report = differentiation_weights(nodes, PointEval(x), kernel, space)
    values = test_function(nodes.points[:, 0], nodes.points[:, 1])
    interp = fit_interpolant(nodes, values, kernel, space)
    assert report.weights @ values == pytest.approx(eval_interpolant(interp, x), abs=1e-10)


def random_node_sets(rng: np.random.Generator) -> list[NodeSet]:
    lattice = grid_nodes(2, 2.0).points
    sets = []
    for _ in range(25):
        size = int(rng.integers(8, lattice.shape[0] + 1))
        sets.append(NodeSet(points=lattice[rng.choice(lattice.shape[0], size=size, replace=False)]))
    for i in range(25):
        n = (10, 20, 40)[i % 3]
        sets.append(ellipse_nodes(EllipseSpec(n=n, seed=i))[0])
    return sets


def test_interpolation_invariants() -> None:
    rng = np.random.default_rng(22)
    for i, nodes in enumerate(random_node_sets(rng)):
        s, q = ((5.0, 3), (7.0, 4))[i % 2]
        kernel, space = KernelSpec(s=s, d=2), PolySpace(d=2, q=q)
        values = test_function(nodes.points[:, 0], nodes.points[:, 1])
        interp = fit_interpolant(nodes, values, kernel, space)

        K = kernel_matrix(kernel, interp.scaled_nodes.points, interp.scaled_nodes.points)
        residual = eval_interpolant(interp, nodes.points) - values
        assert np.max(np.abs(residual)) <= 1e-8 * (1.0 + np.abs(values).max() + (np.abs(K) @ np.abs(interp.c)).max())
        P = vandermonde(space, interp.scaled_nodes)
        assert np.max(np.abs(P.T @ interp.c)) <= 1e-9 * (1.0 + (np.abs(P).T @ np.abs(interp.c)).max())

        coefficients = rng.normal(size=space.m)
        polynomial = eval_basis(space, nodes.points) @ coefficients
        reproduced = fit_interpolant(nodes, polynomial, kernel, space)
        assert np.max(np.abs(reproduced.c)) <= 1e-8


def test_polynomial_part_is_unique_on_ellipse() -> None:
    for s, q in ((5.0, 3), (7.0, 4), (9.0, 5)):
        for n in (2 * q - 1, 20):
            spec = EllipseSpec(n=n, seed=3)
            nodes, _ = ellipse_nodes(spec)
            kernel, space = KernelSpec(s=s, d=2), PolySpace(d=2, q=q)
            interp = fit_interpolant(nodes, test_function(nodes.points[:, 0], nodes.points[:, 1]), kernel, space)
            samples = spec.point(np.linspace(0.0, 2 * math.pi, 1000, endpoint=False))
            values = eval_interpolant(interp, samples)
            null = scipy.linalg.null_space(vandermonde(space, interp.scaled_nodes))
            assert null.shape[1] == space.m - (2 * q - 1)
            for u in null.T:
                shifted = interp.model_copy(update={"v": interp.v + u})
                scale = 1.0 + np.abs(values).max() + np.abs(u).sum()
                np.testing.assert_allclose(eval_interpolant(shifted, samples), values, atol=1e-8 * scale)


def test_single_node_interpolant() -> None:
    nodes = NodeSet(points=[[0.5, -1.0]])
    interp = fit_interpolant(nodes, [3.0], KernelSpec(s=1, d=2), PolySpace(d=2, q=1))
    assert eval_interpolant(interp, [0.5, -1.0]) == pytest.approx(3.0)
    assert eval_interpolant(interp, [2.0, 2.0]) == pytest.approx(3.0)


def test_interpolant_gradient_matches_finite_differences() -> None:
    nodes, _ = ellipse_nodes(EllipseSpec(n=20, seed=1))
    kernel, space = KernelSpec(s=5, d=2), PolySpace(d=2, q=3)
    interp = fit_interpolant(nodes, test_function(nodes.points[:, 0], nodes.points[:, 1]), kernel, space)
    h = 1e-6
    for x in ([0.2, 0.1], [0.9, 0.3], [-0.4, -0.6]):
        x = np.array(x)
        fd = [
            (eval_interpolant(interp, x + h * e) - eval_interpolant(interp, x - h * e)) / (2 * h)
            for e in np.eye(2)
        ]
        np.testing.assert_allclose(eval_interpolant_gradient(interp, x), fd, rtol=1e-5, atol=1e-6)


def test_project_tangent() -> None:
    normals = np.array([[1.0, 0.0], [0.6, 0.8]])
    tangential = project_tangent(np.array([[2.0, 3.0], [1.0, 1.0]]), normals)
    np.testing.assert_allclose(tangential[0], [0.0, 3.0])
    np.testing.assert_allclose(np.sum(tangential * normals, axis=1), 0.0, atol=1e-15)
    with pytest.raises(InvalidNormalError):
        project_tangent([1.0, 1.0], [1.0, 1.0])


def test_surface_gradient_routes_agree() -> None:
    spec = EllipseSpec(n=20, seed=4)
    nodes, _ = ellipse_nodes(spec)
    kernel, space = KernelSpec(s=5, d=2), PolySpace(d=2, q=3)
    values = test_function(nodes.points[:, 0], nodes.points[:, 1])
    interp = fit_interpolant(nodes, values, kernel, space)
    t, samples, normals = ellipse_samples(spec, refinement=3)
    for i in (0, 7, 31):
        W = surface_gradient_weights(nodes, samples[i], normals[i], kernel, space)
        expected = surface_gradient(interp, samples[i], normals[i])
        np.testing.assert_allclose(W.T @ values, expected, atol=1e-7 * (1.0 + np.abs(expected).max()))
        assert abs((W.T @ values) @ normals[i]) < 1e-10


def test_surface_gradient_projects_once() -> None:
    spec = EllipseSpec(n=40, seed=2)
    nodes, _ = ellipse_nodes(spec)
    values = test_function(nodes.points[:, 0], nodes.points[:, 1])
    interp = fit_interpolant(nodes, values, KernelSpec(s=7, d=2), PolySpace(d=2, q=4))
    _, samples, normals = ellipse_samples(spec, refinement=2)
    tangential = surface_gradient(interp, samples, normals)
    np.testing.assert_allclose(project_tangent(tangential, normals), tangential, atol=1e-13 * (1.0 + np.abs(tangential).max()))
    vectors = np.random.default_rng(8).normal(size=samples.shape)
    once = project_tangent(vectors, normals)
    np.testing.assert_allclose(project_tangent(once, normals), once, atol=1e-13)


def test_surface_gradient_vanishes_where_the_gradient_does() -> None:
    normal = np.array([1.0, 0.0])
    np.testing.assert_allclose(project_tangent(test_function_gradient(1.0, 0.0), normal), [0.0, 0.0], atol=1e-15)
    spec = EllipseSpec(n=80, seed=0)
    nodes, _ = ellipse_nodes(spec)
    values = test_function(nodes.points[:, 0], nodes.points[:, 1])
    interp = fit_interpolant(nodes, values, KernelSpec(s=7, d=2), PolySpace(d=2, q=4))
    tangential = surface_gradient(interp, [1.0, 0.0], normal)
    assert tangential[0] == 0.0
    assert abs(tangential[1]) < 1e-4


def test_gradient_component_is_inconsistent_on_ellipse() -> None:
    spec = EllipseSpec(n=20, seed=4)
    nodes, _ = ellipse_nodes(spec)
    x = spec.point(0.3)
    kernel, space = KernelSpec(s=5, d=2), PolySpace(d=2, q=3)
    with pytest.raises(InconsistentFunctionalError):
        differentiation_weights(nodes, GradientComponentAt(x, 0), kernel, space, prescale=True)
    tangent = project_tangent([0.0, 1.0], ellipse_normal(spec, 0.3))
    report = differentiation_weights(
        nodes, DirectionalDerivativeAt(x, tangent / np.linalg.norm(tangent)), kernel, space, prescale=True
    )
    assert report.dim_n_px == 1
