"""Kernel-based numerical differentiation, interpolation and optimal recovery.

Numerical differentiation
-------------------------

For a linear functional ``lambda`` and nodes ``X = {x_1, ..., x_n}`` the
weights of ``lambda f ~ sum_i w_i f(x_i)`` are the unique solution of::

    sum_j w_j K(x_i, x_j) + p(x_i) = lambda' K(x_i)   (i = 1..n, some p in P)
    sum_i w_i p_j(x_i) = lambda p_j                   (j = 1..m)

They exist as soon as the second block is solvable (``X`` is P-consistent
for ``lambda``), whether or not ``X`` is a determining set for ``P``. The
weights are exact for every ``sigma = sum_j c_j K(., x_j) + p`` with
``P_X^T c = 0`` and minimise the worst case error :func:`worst_case_error`
among all polynomially exact weights.

Interpolation
-------------

:func:`fit_interpolant` solves the same system with ``a = f`` and ``b = 0``.
The kernel coefficients ``c`` are always unique; the polynomial part is
returned with minimal coefficient norm.

Example::

    from dartfx.rbf import KernelSpec, PolySpace, LaplacianAt, grid_nodes, differentiation_weights
    from dartfx.rbf.geometries import GridByR

    nodes = grid_nodes(2, 2 ** 0.5)
    report = differentiation_weights(
        nodes, LaplacianAt([0.0, 0.0]), KernelSpec(s=7, d=2), PolySpace(d=2, q=4), prescale=GridByR(r=2 ** 0.5)
    )
    report.weights, report.error, report.l1, report.cond
"""

from __future__ import annotations

import logging
from functools import cached_property
from typing import Any, Literal, Optional, Union

import numpy as np
import scipy.linalg
from pydantic import Field, field_validator

from ._base import ArrayModel, as_float_array, as_points
from .errors import (
    DimensionMismatchError,
    ExactnessError,
    IncompatibleSpaceError,
    InconsistentFunctionalError,
    InternalConsistencyError,
    InvalidNormalError,
)
from .functionals import DirectionalDerivativeAt, LinearFunctional
from .geometries import AffineScaling, Centroid, ScalingConvention, prescale as prescale_nodes
from .kernels import KernelSpec, kernel_gradient_matrix, kernel_matrix
from .polynomials import NodeSet, PolySpace, eval_basis, gradient_basis, vandermonde
from .saddle import SaddleProblem, is_consistent, null_basis, solve_reduced, solve_secondary, solve_stacked
from .settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

SolveMethod = Literal["stacked", "reduced"]
Prescale = Union[bool, ScalingConvention]


class WeightReport(ArrayModel):
    """Weights of a numerical differentiation formula with diagnostics.

    Attributes
    ----------
    weights : numpy.ndarray
        ``w``, one weight per node, for the original node coordinates.
    poly_part : numpy.ndarray
        Minimal-norm ``v`` with ``P_X v = a - K_X w`` in original coordinates.
    error : float | None
        Worst case error ``E(w)``; None when the kernel is not smooth enough
        for the functional (``s <= 2k``) or the derivative is unavailable.
    l1 : float
        ``||w||_1``.
    cond : float | None
        Condition number of the stacked system; None when ``dim N(P_X^T) = 0``
        or the reduced path was used.
    dim_n_px, dim_n_pxt : int
        ``dim N(P_X)`` and ``dim N(P_X^T)``.
    """

    weights: np.ndarray
    poly_part: np.ndarray
    error: Optional[float] = Field(default=None, ge=0)
    l1: float = Field(ge=0)
    cond: Optional[float] = None
    dim_n_px: int = Field(ge=0)
    dim_n_pxt: int = Field(ge=0)

    @field_validator("weights", "poly_part", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        return as_float_array(value, ndim=1, name="weights")


class Interpolant(ArrayModel):
    """``sigma(x) = sum_j c_j K(y, y_j) + sum_k v_k p_k(y)`` with ``y = transform(x)``.

    The coefficients refer to the transformed nodes ``y_j = transform(x_j)``.
    """

    nodes: NodeSet
    c: np.ndarray
    v: np.ndarray
    kernel: KernelSpec
    space: PolySpace
    transform: AffineScaling
    cond: Optional[float] = None

    @field_validator("c", "v", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        return as_float_array(value, ndim=1, name="coefficients")

    @cached_property
    def scaled_nodes(self) -> NodeSet:
        return self.transform.apply_nodes(self.nodes)


def _check_setup(nodes: NodeSet, kernel: KernelSpec, space: PolySpace) -> None:
    if not (nodes.d == kernel.d == space.d):
        raise DimensionMismatchError(f"dimensions differ: nodes {nodes.d}, kernel {kernel.d}, space {space.d}")
    if not kernel.is_compatible(space.q):
        raise IncompatibleSpaceError(
            f"K_(s={kernel.s:g}) is conditionally positive definite only for q >= {kernel.min_order}, got q={space.q}"
        )


def _resolve_prescale(nodes: NodeSet, kernel: KernelSpec, prescale: Prescale) -> tuple[NodeSet, Optional[AffineScaling]]:
    if prescale is False:
        return nodes, None
    convention = Centroid() if prescale is True else prescale
    if kernel.is_even:
        logger.warning("prescaling with even s=%g: weights are pulled back by h^-k, which is exact only for non-even s", kernel.s)
    scaled, scaling = prescale_nodes(nodes, convention)  # type: ignore[arg-type]
    return scaled, scaling


def _build_problem(nodes: NodeSet, functional: LinearFunctional, kernel: KernelSpec, space: PolySpace) -> SaddleProblem:
    return SaddleProblem(
        A=kernel_matrix(kernel, nodes.points, nodes.points),
        B=vandermonde(space, nodes),
        a=functional.apply_kernel(kernel, nodes),
        b=functional.apply_basis(space),
    )


def differentiation_weights(
    nodes: NodeSet,
    functional: LinearFunctional,
    kernel: KernelSpec,
    space: PolySpace,
    prescale: Prescale = False,
    *,
    method: SolveMethod = "stacked",
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> WeightReport:
    """Unique weights of the kernel-based formula for ``functional`` on ``nodes``.

    Parameters
    ----------
    nodes : NodeSet
        The nodes ``X``.
    functional : LinearFunctional
        The functional to approximate.
    kernel : KernelSpec
        Polyharmonic kernel.
    space : PolySpace
        Polynomial space ``P``; needs ``q >= floor(s/2) + 1``.
    prescale : bool | GridByR | Centroid, optional
        Solve on rescaled nodes (True selects :class:`Centroid`). Weights are
        mapped back by ``h^(-k)`` for a functional of order ``k``.
    method : {"stacked", "reduced"}, optional
        Solve path of the saddle point system.
    tolerances : Tolerances, optional
        Numerical tolerances.

    Returns
    -------
    WeightReport
        Weights for the original nodes, with ``E(w)`` evaluated in original coordinates.

    Raises
    ------
    InconsistentFunctionalError
        If no weights reproduce ``functional`` on ``space`` (``X`` is not P-consistent).
    IncompatibleSpaceError
        If ``q`` is below the order of conditional positive definiteness.
    """
    _check_setup(nodes, kernel, space)
    functional._check(nodes.d)
    work_nodes, scaling = _resolve_prescale(nodes, kernel, prescale)
    work_functional = functional.rescaled(scaling) if scaling is not None else functional

    problem = _build_problem(work_nodes, work_functional, kernel, space)
    null = null_basis(problem.B, tolerances=tolerances)
    consistent, w0 = is_consistent(problem.B, problem.b, null=null, tolerances=tolerances)
    if not consistent:
        raise InconsistentFunctionalError(
            f"functional {functional} not polynomially consistent on X ({nodes.n} nodes, q={space.q})",
            functional=functional,
            n_nodes=nodes.n,
        )
    cond: Optional[float] = None
    if method == "stacked":
        w, diagnostics = solve_stacked(problem, null=null, tolerances=tolerances)
        cond = diagnostics.cond
    elif method == "reduced":
        w = solve_reduced(problem, w0, null=null, tolerances=tolerances)
    else:
        raise ValueError(f"unknown solve method {method!r}")
    if scaling is not None:
        w = scaling.pull_back_weights(w, functional.order)

    original = problem if scaling is None else _build_problem(nodes, functional, kernel, space)
    v = solve_secondary(original, w, tolerances=tolerances)
    error = _optional_worst_case_error(nodes, w, functional, kernel, space, tolerances)
    report = WeightReport(
        weights=w,
        poly_part=v,
        error=error,
        l1=float(np.sum(np.abs(w))),
        cond=cond,
        dim_n_px=space.m - null.rank,
        dim_n_pxt=null.k,
    )
    logger.debug(
        "differentiation_weights: %s on %d nodes, dN=%d dNt=%d E=%s l1=%.4g cond=%s",
        functional, nodes.n, report.dim_n_px, report.dim_n_pxt, report.error, report.l1, report.cond,
    )
    return report


def _optional_worst_case_error(
    nodes: NodeSet, w: np.ndarray, functional: LinearFunctional, kernel: KernelSpec, space: PolySpace, tolerances: Tolerances
) -> Optional[float]:
    if kernel.s <= 2 * functional.order or (kernel.is_even and functional.order > 0):
        return None
    return worst_case_error(nodes, w, functional, kernel, space, tolerances=tolerances)


def worst_case_error(
    nodes: NodeSet,
    u: Any,
    functional: LinearFunctional,
    kernel: KernelSpec,
    space: PolySpace,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Worst case error ``E(u)`` of ``lambda f ~ sum u_i f(x_i)`` on the unit ball of the native space.

    ``E(u)^2 = D'D''K(x, x) - 2 sum_i u_i D'K(x, x_i) + sum_ij u_i u_j K(x_i, x_j)``.
    Small negative values of ``E^2`` caused by cancellation are clamped to 0.

    Raises
    ------
    ExactnessError
        If ``u`` is not exact on ``space`` (the formula is then not the worst case error).
    UnsupportedDerivativeError
        If ``s <= 2k`` for a functional of order ``k``.
    """
    _check_setup(nodes, kernel, space)
    u = np.asarray(u, dtype=float)
    if u.shape != (nodes.n,):
        raise DimensionMismatchError(f"weights have shape {u.shape}, expected ({nodes.n},)")
    diagonal = functional.apply_twice(kernel)

    P = vandermonde(space, nodes)
    b = functional.apply_basis(space)
    residual = float(np.max(np.abs(P.T @ u - b)))
    scale = 1.0 + float(np.max(np.abs(b))) + float(np.max(np.abs(P).T @ np.abs(u)))
    if residual > tolerances.exactness_rtol * scale:
        raise ExactnessError(f"weights are not exact on P^{space.d}_{space.q}: residual {residual:.3e}")

    K = kernel_matrix(kernel, nodes.points, nodes.points)
    a = functional.apply_kernel(kernel, nodes)
    cross = float(a @ u)
    quadratic = float(u @ K @ u)
    squared = diagonal - 2.0 * cross + quadratic
    if squared < 0.0:
        magnitude = abs(diagonal) + 2.0 * abs(cross) + float(np.abs(u) @ np.abs(K) @ np.abs(u))
        if squared < -(tolerances.clamp_rtol * magnitude + tolerances.clamp_atol):
            raise InternalConsistencyError(f"squared worst case error is negative: {squared:.3e}")
        squared = 0.0
    return float(np.sqrt(squared))


def optimal_weights_qp(
    nodes: NodeSet,
    functional: LinearFunctional,
    kernel: KernelSpec,
    space: PolySpace,
    prescale: Prescale = False,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Minimise ``E(u)^2`` subject to polynomial exactness, through the KKT system.

    With ``H = K_X`` and ``g = [lambda' K(x_i)]`` the stationarity conditions are::

        [ H    P_X ] [u ]   [g]
        [ P_X^T  0 ] [mu] = [b]

    solved by SVD-based least squares (minimal norm when ``P_X`` is column
    rank deficient). The solution coincides with :func:`differentiation_weights`.

    Raises
    ------
    InconsistentFunctionalError
        If the feasible set is empty.
    """
    _check_setup(nodes, kernel, space)
    work_nodes, scaling = _resolve_prescale(nodes, kernel, prescale)
    work_functional = functional.rescaled(scaling) if scaling is not None else functional
    H = kernel_matrix(kernel, work_nodes.points, work_nodes.points)
    g = work_functional.apply_kernel(kernel, work_nodes)
    P = vandermonde(space, work_nodes)
    b = work_functional.apply_basis(space)
    n, m = P.shape
    kkt = np.block([[H, P], [P.T, np.zeros((m, m))]])
    solution, _, rank, _ = scipy.linalg.lstsq(kkt, np.concatenate([g, b]), cond=tolerances.kkt_rcond, lapack_driver="gelsd")
    u = solution[:n]
    residual = float(np.linalg.norm(P.T @ u - b))
    scale = 1.0 + float(np.linalg.norm(b)) + float(np.linalg.norm(np.abs(P).T @ np.abs(u)))
    if residual > tolerances.consistency_rtol * scale:
        raise InconsistentFunctionalError(
            f"optimal recovery problem for {functional} is infeasible on X ({nodes.n} nodes)",
            functional=functional,
            n_nodes=nodes.n,
            residual=residual,
        )
    logger.debug("optimal_weights_qp: KKT size %d, rank %d", n + m, rank)
    return scaling.pull_back_weights(u, functional.order) if scaling is not None else u


def fit_interpolant(
    nodes: NodeSet,
    values: Any,
    kernel: KernelSpec,
    space: PolySpace,
    *,
    method: SolveMethod = "stacked",
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Interpolant:
    """Interpolant ``sigma`` with ``sigma(x_i) = f_i`` and ``P_X^T c = 0``.

    The nodes are centred at their centre of gravity and divided by the largest
    distance to it before solving (a single node is only shifted).
    """
    _check_setup(nodes, kernel, space)
    f = np.asarray(values, dtype=float)
    if f.shape != (nodes.n,):
        raise DimensionMismatchError(f"values have shape {f.shape}, expected ({nodes.n},)")
    if nodes.n == 1:
        transform = AffineScaling(shift=nodes.points[0], scale=1.0)
        scaled = transform.apply_nodes(nodes)
    else:
        scaled, transform = prescale_nodes(nodes, Centroid())

    problem = SaddleProblem(
        A=kernel_matrix(kernel, scaled.points, scaled.points),
        B=vandermonde(space, scaled),
        a=f,
        b=np.zeros(space.m),
    )
    null = null_basis(problem.B, tolerances=tolerances)
    cond: Optional[float] = None
    if method == "stacked":
        c, diagnostics = solve_stacked(problem, null=null, tolerances=tolerances)
        cond = diagnostics.cond
    elif method == "reduced":
        c = solve_reduced(problem, np.zeros(nodes.n), null=null, tolerances=tolerances)
    else:
        raise ValueError(f"unknown solve method {method!r}")
    v = solve_secondary(problem, c, null=null, tolerances=tolerances)
    logger.debug("fit_interpolant: %d nodes, m=%d, rank(P)=%d, cond=%s", nodes.n, space.m, null.rank, cond)
    return Interpolant(nodes=nodes, c=c, v=v, kernel=kernel, space=space, transform=transform, cond=cond)


def eval_interpolant(interp: Interpolant, x: Any) -> Any:
    """``sigma(x)`` for one point (float) or an array of points (1-D array)."""
    points, single = as_points(x, interp.space.d)
    y = interp.transform.apply(points).reshape(points.shape)
    values = kernel_matrix(interp.kernel, y, interp.scaled_nodes.points) @ interp.c
    values = values + eval_basis(interp.space, y).reshape(y.shape[0], -1) @ interp.v
    return float(values[0]) if single else values


def eval_interpolant_gradient(interp: Interpolant, x: Any) -> np.ndarray:
    """``grad sigma(x)``: shape ``(d,)`` for one point, ``(k, d)`` for ``k`` points."""
    points, single = as_points(x, interp.space.d)
    y = interp.transform.apply(points).reshape(points.shape)
    grads = np.einsum("knd,n->kd", kernel_gradient_matrix(interp.kernel, y, interp.scaled_nodes.points), interp.c)
    grads = grads + np.einsum("kmd,m->kd", gradient_basis(interp.space, y).reshape(y.shape[0], interp.space.m, -1), interp.v)
    grads = grads / interp.transform.scale
    return grads[0] if single else grads


def project_tangent(vectors: Any, normals: Any, *, tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """``g - (g . nu) nu`` row by row; every normal must have unit length."""
    g = np.asarray(vectors, dtype=float)
    nu = np.asarray(normals, dtype=float)
    if g.shape[-1] != nu.shape[-1]:
        raise DimensionMismatchError(f"vector shape {g.shape} does not match normal shape {nu.shape}")
    lengths = np.linalg.norm(nu, axis=-1)
    if np.any(np.abs(lengths - 1.0) > tolerances.normal_atol):
        raise InvalidNormalError(f"normal must have unit length, got length(s) {lengths}")
    return g - np.sum(g * nu, axis=-1, keepdims=True) * nu


def surface_gradient(
    interp: Interpolant, x: Any, normal: Any, *, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """Surface gradient ``grad sigma(x) - (grad sigma(x) . nu) nu`` at points on the surface."""
    return project_tangent(eval_interpolant_gradient(interp, x), normal, tolerances=tolerances)


def surface_gradient_weights(
    nodes: NodeSet,
    x: Any,
    normal: Any,
    kernel: KernelSpec,
    space: PolySpace,
    prescale: Prescale = True,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Weights ``W`` (n x d) with ``W^T f ~ surface gradient of f at x``.

    Built from the directional derivative formulas along an orthonormal basis
    ``t_1, ..., t_(d-1)`` of the tangent space: ``W = sum_j w_j t_j^T``.
    Tangential derivatives are polynomially consistent on point sets lying on
    an algebraic surface, unlike the individual gradient components.
    """
    x = np.asarray(x, dtype=float)
    nu = np.asarray(normal, dtype=float)
    project_tangent(nu, nu, tolerances=tolerances)
    tangents = scipy.linalg.null_space(nu.reshape(1, -1))
    W = np.zeros((nodes.n, nodes.d))
    for t in tangents.T:
        report = differentiation_weights(
            nodes, DirectionalDerivativeAt(x, t), kernel, space, prescale=prescale, tolerances=tolerances
        )
        W += np.outer(report.weights, t)
    return W
