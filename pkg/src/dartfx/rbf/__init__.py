"""Public package exports for :mod:`dartfx.rbf`.

Polyharmonic kernel interpolation and numerical differentiation on node sets
that need not be determining for the polynomial space.
"""

from .__about__ import __version__
from .errors import (
    DefinitenessError,
    DegenerateScalingError,
    DimensionMismatchError,
    DuplicateNodesError,
    ExactnessError,
    IncompatibleSpaceError,
    InconsistentFunctionalError,
    InternalConsistencyError,
    InvalidNormalError,
    KernelSingularityError,
    RbfError,
    UnsupportedDerivativeError,
)
from .functionals import DirectionalDerivativeAt, GradientComponentAt, LaplacianAt, LinearFunctional, PointEval
from .geometries import (
    AffineScaling,
    Centroid,
    EllipseSpec,
    GridByR,
    ellipse_nodes,
    ellipse_normal,
    grid_nodes,
    prescale,
)
from .kernels import (
    KernelSpec,
    kernel_bilaplacian,
    kernel_eval,
    kernel_gradient,
    kernel_laplacian,
    kernel_matrix,
    radial_value,
)
from .polynomials import NodeSet, PolySpace, eval_basis, gradient_basis, laplacian_basis, vandermonde
from .recovery import (
    Interpolant,
    WeightReport,
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
from .saddle import (
    SaddleProblem,
    is_consistent,
    null_basis,
    rank_nullity,
    solve_reduced,
    solve_secondary,
    solve_stacked,
)
from .settings import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "__version__",
    "AffineScaling",
    "Centroid",
    "DEFAULT_TOLERANCES",
    "DefinitenessError",
    "DegenerateScalingError",
    "DimensionMismatchError",
    "DirectionalDerivativeAt",
    "DuplicateNodesError",
    "EllipseSpec",
    "ExactnessError",
    "GradientComponentAt",
    "GridByR",
    "IncompatibleSpaceError",
    "InconsistentFunctionalError",
    "InternalConsistencyError",
    "Interpolant",
    "InvalidNormalError",
    "KernelSingularityError",
    "KernelSpec",
    "LaplacianAt",
    "LinearFunctional",
    "NodeSet",
    "PointEval",
    "PolySpace",
    "RbfError",
    "SaddleProblem",
    "Tolerances",
    "UnsupportedDerivativeError",
    "WeightReport",
    "differentiation_weights",
    "ellipse_nodes",
    "ellipse_normal",
    "eval_basis",
    "eval_interpolant",
    "eval_interpolant_gradient",
    "fit_interpolant",
    "gradient_basis",
    "grid_nodes",
    "is_consistent",
    "kernel_bilaplacian",
    "kernel_eval",
    "kernel_gradient",
    "kernel_laplacian",
    "kernel_matrix",
    "laplacian_basis",
    "null_basis",
    "optimal_weights_qp",
    "prescale",
    "project_tangent",
    "radial_value",
    "rank_nullity",
    "solve_reduced",
    "solve_secondary",
    "solve_stacked",
    "surface_gradient",
    "surface_gradient_weights",
    "vandermonde",
    "worst_case_error",
]
