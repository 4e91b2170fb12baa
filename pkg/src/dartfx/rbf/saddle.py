"""Null space methods for saddle point systems.

Solves block systems of the form::

    [ A    B ] [w]   [a]
    [ B^T  0 ] [v] = [b]

with ``A`` symmetric ``n x n`` and ``B`` of size ``n x m``, assuming only that
``A`` is definite on ``N(B^T)``. Neither a full column rank of ``B`` nor
``n >= m`` is required. ``w`` exists and is unique if and only if
``b in R(B^T)``; ``v`` is then determined up to ``N(B)`` and the solver
returns the one with the smallest 2-norm.

Three paths share one SVD of ``B``:

- :func:`solve_stacked` solves the overdetermined full-rank system
  ``[M^T A; B^T] w = [M^T a; b]`` in the least squares sense (default path).
- :func:`solve_reduced` solves ``M^T A M u = M^T (a - A w0)`` and returns
  ``w = w0 + M u``.
- :func:`solve_secondary` recovers ``v = B^+ (a - A w)``.

Here ``M`` is an orthonormal basis of ``N(B^T)`` made of left singular
vectors of ``B`` and ``w0`` is the minimal-norm solution of ``B^T w0 = b``.
"""

from __future__ import annotations

import logging
from typing import Any, Optional

import numpy as np
import scipy.linalg
from pydantic import field_validator, model_validator

from ._base import ArrayModel, as_float_array
from .errors import DefinitenessError, DimensionMismatchError, InconsistentFunctionalError, InternalConsistencyError
from .settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


class SaddleProblem(ArrayModel):
    """Data of the block system: ``A`` (n x n, symmetric), ``B`` (n x m), ``a`` (n), ``b`` (m)."""

    A: np.ndarray
    B: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @field_validator("A", "B", mode="before")
    @classmethod
    def _coerce_matrix(cls, value: Any) -> np.ndarray:
        return as_float_array(value, ndim=2, name="matrix")

    @field_validator("a", "b", mode="before")
    @classmethod
    def _coerce_vector(cls, value: Any) -> np.ndarray:
        return as_float_array(value, ndim=1, name="vector")

    @model_validator(mode="after")
    def _check_shapes(self) -> "SaddleProblem":
        n, m = self.B.shape
        if self.A.shape != (n, n) or self.a.shape != (n,) or self.b.shape != (m,):
            raise DimensionMismatchError(
                f"incompatible shapes A{self.A.shape}, B{self.B.shape}, a{self.a.shape}, b{self.b.shape}"
            )
        if not np.array_equal(self.A, self.A.T):
            raise ValueError("A must be symmetric")
        return self

    @property
    def n(self) -> int:
        return int(self.B.shape[0])

    @property
    def m(self) -> int:
        return int(self.B.shape[1])


class NullBasis(ArrayModel):
    """Orthonormal basis ``M`` (n x k) of ``N(B^T)`` together with the SVD data it came from.

    Attributes
    ----------
    M : numpy.ndarray
        Columns span ``N(B^T)``; ``M^T M = I_k``.
    rank : int
        Numerical rank of ``B``.
    U, sigma, Vt : numpy.ndarray
        Thin SVD factors of ``B`` restricted to its numerical range, reused
        for the pseudoinverse solves.
    """

    M: np.ndarray
    rank: int
    U: np.ndarray
    sigma: np.ndarray
    Vt: np.ndarray

    @property
    def k(self) -> int:
        return int(self.M.shape[1])

    def rotated(self, Q: Any) -> "NullBasis":
        """The same null space with basis ``M Q`` for an orthogonal ``Q``."""
        Q = np.asarray(Q, dtype=float)
        if Q.shape != (self.k, self.k):
            raise DimensionMismatchError(f"rotation must be {self.k}x{self.k}, got {Q.shape}")
        return self.model_copy(update={"M": as_float_array(self.M @ Q, ndim=2, name="M")})

    def pinv_solve(self, rhs: np.ndarray) -> np.ndarray:
        """Minimal-norm least squares solution of ``B x = rhs``."""
        return self.Vt.T @ ((self.U.T @ rhs) / self.sigma)

    def pinv_transpose_solve(self, rhs: np.ndarray) -> np.ndarray:
        """Minimal-norm least squares solution of ``B^T y = rhs``."""
        return self.U @ ((self.Vt @ rhs) / self.sigma)


class StackedDiagnostics(ArrayModel):
    """Diagnostics of :func:`solve_stacked`.

    ``cond`` is the 2-norm condition number of the stacked matrix, or None
    when ``N(B^T) = 0`` and the system reduces to ``B^T w = b``.
    """

    cond: Optional[float]
    rank: int
    nullity: int
    nullity_t: int


def null_basis(B: Any, *, tolerances: Tolerances = DEFAULT_TOLERANCES) -> NullBasis:
    """Orthonormal basis of ``N(B^T)``, the orthogonal complement of ``R(B)`` in ``R^n``."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2:
        raise DimensionMismatchError(f"B must be a matrix, got shape {B.shape}")
    n, m = B.shape
    U, sigma, Vt = scipy.linalg.svd(B, full_matrices=True)
    sigma_max = float(sigma[0]) if sigma.size else 0.0
    rank = int(np.sum(sigma > tolerances.rank_cutoff(B.shape, sigma_max))) if sigma_max > 0 else 0
    logger.debug("null_basis: B is %dx%d, rank %d, nullity(B^T) %d", n, m, rank, n - rank)
    return NullBasis(
        M=as_float_array(U[:, rank:], ndim=2, name="M"),
        rank=rank,
        U=as_float_array(U[:, :rank], ndim=2, name="U"),
        sigma=as_float_array(sigma[:rank], ndim=1, name="sigma"),
        Vt=as_float_array(Vt[:rank, :], ndim=2, name="Vt"),
    )


def rank_nullity(B: Any, *, tolerances: Tolerances = DEFAULT_TOLERANCES) -> tuple[int, int, int]:
    """Return ``(rank(B), dim N(B), dim N(B^T))``."""
    B = np.asarray(B, dtype=float)
    n, m = B.shape
    rank = null_basis(B, tolerances=tolerances).rank
    return rank, m - rank, n - rank


def _consistency_residual(B: np.ndarray, w: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    residual = float(np.linalg.norm(B.T @ w - b))
    scale = 1.0 + float(np.linalg.norm(b)) + float(np.linalg.norm(np.abs(B).T @ np.abs(w)))
    return residual, scale


def is_consistent(
    B: Any, b: Any, *, null: Optional[NullBasis] = None, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> tuple[bool, np.ndarray]:
    """Test ``b in R(B^T)``.

    Returns
    -------
    tuple[bool, numpy.ndarray]
        The verdict and ``w0``, the minimal-norm least squares solution of
        ``B^T w0 = b``. The verdict is True iff
        ``||B^T w0 - b||_2 <= consistency_rtol * (1 + ||b||_2)``.
    """
    B = np.asarray(B, dtype=float)
    b = np.asarray(b, dtype=float)
    if b.shape != (B.shape[1],):
        raise DimensionMismatchError(f"b has shape {b.shape}, expected ({B.shape[1]},)")
    null = null if null is not None else null_basis(B, tolerances=tolerances)
    w0 = null.pinv_transpose_solve(b)
    residual = float(np.linalg.norm(B.T @ w0 - b))
    consistent = residual <= tolerances.consistency_rtol * (1.0 + float(np.linalg.norm(b)))
    logger.debug("is_consistent: residual %.3e, consistent=%s", residual, consistent)
    return consistent, w0


def solve_stacked(
    problem: SaddleProblem, *, null: Optional[NullBasis] = None, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> tuple[np.ndarray, StackedDiagnostics]:
    """Solve ``[M^T A; B^T] w = [M^T a; b]`` as a full-rank least squares problem.

    Raises
    ------
    InconsistentFunctionalError
        If the ``B^T`` block is not satisfied, i.e. ``b`` is not in ``R(B^T)``.
    DefinitenessError
        If the stacked matrix is rank deficient (``A`` not definite on ``N(B^T)``).
    """
    null = null if null is not None else null_basis(problem.B, tolerances=tolerances)
    M = null.M
    S = np.vstack([M.T @ problem.A, problem.B.T])
    rhs = np.concatenate([M.T @ problem.a, problem.b])
    U, sigma, Vt = scipy.linalg.svd(S, full_matrices=False)
    if sigma.size < problem.n or sigma[-1] == 0.0:
        raise DefinitenessError("stacked matrix is rank deficient; A is not definite on N(B^T)")
    w = Vt.T @ ((U.T @ rhs) / sigma)
    cond = float(sigma[0] / sigma[-1])
    if cond * problem.n * np.finfo(float).eps > 1.0:
        logger.warning("solve_stacked: stacked matrix is ill-conditioned (cond %.2e)", cond)

    residual, scale = _consistency_residual(problem.B, w, problem.b)
    if residual > tolerances.consistency_rtol * scale:
        raise InconsistentFunctionalError(
            f"functional not polynomially consistent on X: residual {residual:.3e} exceeds "
            f"{tolerances.consistency_rtol:.1e} * {scale:.3e}",
            n_nodes=problem.n,
            residual=residual,
        )
    diagnostics = StackedDiagnostics(
        cond=cond if null.k > 0 else None,
        rank=null.rank,
        nullity=problem.m - null.rank,
        nullity_t=null.k,
    )
    logger.debug("solve_stacked: n=%d m=%d k=%d cond=%s", problem.n, problem.m, null.k, diagnostics.cond)
    return w, diagnostics


def solve_reduced(
    problem: SaddleProblem,
    w0: Any,
    *,
    null: Optional[NullBasis] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Null space solve: ``M^T A M u = M^T (a - A w0)``, ``w = w0 + M u``.

    ``w0`` must satisfy ``B^T w0 = b`` (see :func:`is_consistent`).

    Raises
    ------
    DefinitenessError
        If ``M^T A M`` is numerically singular.
    """
    w0 = np.asarray(w0, dtype=float)
    null = null if null is not None else null_basis(problem.B, tolerances=tolerances)
    M = null.M
    if null.k == 0:
        return w0.copy()
    reduced = M.T @ problem.A @ M
    reduced = 0.5 * (reduced + reduced.T)
    eigenvalues, eigenvectors = scipy.linalg.eigh(reduced)
    magnitude = np.abs(eigenvalues)
    if magnitude.min() <= null.k * np.finfo(float).eps * magnitude.max():
        raise DefinitenessError(
            f"reduced matrix M^T A M is numerically singular (eigenvalue range "
            f"[{eigenvalues.min():.3e}, {eigenvalues.max():.3e}])"
        )
    if eigenvalues.min() < 0 < eigenvalues.max():
        raise DefinitenessError("reduced matrix M^T A M is indefinite; A is not definite on N(B^T)")
    rhs = M.T @ (problem.a - problem.A @ w0)
    u = eigenvectors @ ((eigenvectors.T @ rhs) / eigenvalues)
    w = w0 + M @ u
    logger.debug("solve_reduced: k=%d, eigenvalue range [%.3e, %.3e]", null.k, eigenvalues.min(), eigenvalues.max())
    return w


def solve_secondary(
    problem: SaddleProblem,
    w: Any,
    *,
    null: Optional[NullBasis] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Minimal-norm ``v`` with ``B v = a - A w``, i.e. ``v = B^+ (a - A w)``.

    Raises
    ------
    InternalConsistencyError
        If ``a - A w`` is not in ``R(B)`` to tolerance, i.e. ``w`` does not
        solve the first block of the system.
    """
    w = np.asarray(w, dtype=float)
    null = null if null is not None else null_basis(problem.B, tolerances=tolerances)
    target = problem.a - problem.A @ w
    v = null.pinv_solve(target) if null.rank > 0 else np.zeros(problem.m)
    residual = float(np.max(np.abs(problem.B @ v - target), initial=0.0))
    scale = 1.0 + float(np.max(np.abs(problem.a), initial=0.0)) + float(np.max(np.abs(problem.A) @ np.abs(w), initial=0.0))
    if residual > tolerances.residual_rtol * scale:
        raise InternalConsistencyError(
            f"a - A w is not in R(B): residual {residual:.3e} exceeds {tolerances.residual_rtol:.1e} * {scale:.3e}"
        )
    return v
