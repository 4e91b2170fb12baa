"""Polyharmonic kernels and their closed-form derivatives.

The polyharmonic kernel of exponent ``s > 0`` in ``R^d`` is the radial kernel
``K(x, y) = phi_s(||x - y||_2)`` with

    phi_s(r) = (-1)^(floor(s/2) + 1) * r^s * log(r)    if s is an even integer
    phi_s(r) = (-1)^(floor(s/2) + 1) * r^s              otherwise

It is conditionally positive definite with respect to the polynomials of
total order ``q >= floor(s/2) + 1``.

Derivatives are implemented in closed form. For an even integer ``s`` only
the value and the gradient are available; higher derivatives raise
:class:`~dartfx.rbf.errors.UnsupportedDerivativeError`.

Each quantity comes in two flavours: a per-pair function (``kernel_eval``,
``kernel_laplacian``, ...) and a vectorised matrix builder over two point
sets (``kernel_matrix``, ``kernel_laplacian_matrix``, ...). The per-pair
functions are thin wrappers around the matrix builders.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial.distance import cdist

from ._base import as_point, as_points
from .errors import KernelSingularityError, UnsupportedDerivativeError


class KernelSpec(BaseModel):
    """Polyharmonic kernel ``K_{s,d}``.

    Attributes
    ----------
    s : float
        Polyharmonic exponent, ``s > 0``.
    d : int
        Ambient dimension, ``d >= 1``.
    """

    model_config = ConfigDict(frozen=True)

    s: float = Field(gt=0)
    d: int = Field(ge=1)

    @property
    def is_even(self) -> bool:
        """True when ``s`` is an even integer (the ``r^s log r`` branch)."""
        return float(self.s).is_integer() and int(self.s) % 2 == 0

    @property
    def sign(self) -> float:
        """The factor ``(-1)^(floor(s/2) + 1)``."""
        return -1.0 if (math.floor(self.s / 2) + 1) % 2 else 1.0

    @property
    def min_order(self) -> int:
        """Smallest polynomial order ``q`` for which the kernel is conditionally positive definite."""
        return math.floor(self.s / 2) + 1

    def is_compatible(self, q: int) -> bool:
        return q >= self.min_order

    def _require_odd_derivative(self, what: str, s_min: float) -> None:
        if self.is_even:
            raise UnsupportedDerivativeError(f"{what} derivative not implemented for even s={self.s:g}")
        if self.s <= s_min:
            raise UnsupportedDerivativeError(f"{what} derivative not implemented for s={self.s:g} <= {s_min:g}")


def radial_value(spec: KernelSpec, r: Any) -> Any:
    """Evaluate ``phi_s(r)`` for ``r >= 0`` (scalar or array).

    ``phi_s(0) = 0`` for every ``s``, including the continuous extension of
    ``r^s log r``.
    """
    r = np.asarray(r, dtype=float)
    if spec.is_even:
        positive = r > 0
        safe = np.where(positive, r, 1.0)
        value = np.where(positive, safe**spec.s * np.log(safe), 0.0)
    else:
        value = r**spec.s
    value = spec.sign * value
    return float(value) if value.ndim == 0 else value


def _distances(spec: KernelSpec, X: Any, Y: Any) -> tuple[np.ndarray, np.ndarray, bool]:
    A, a_single = as_points(X, spec.d, name="X")
    B, b_single = as_points(Y, spec.d, name="Y")
    return A, B, a_single and b_single


def kernel_matrix(spec: KernelSpec, X: Any, Y: Any) -> np.ndarray:
    """Matrix ``[K(x_i, y_j)]`` for point sets ``X`` (k x d) and ``Y`` (l x d)."""
    A, B, _ = _distances(spec, X, Y)
    return np.asarray(radial_value(spec, cdist(A, B)))


def kernel_eval(spec: KernelSpec, x: Any, y: Any) -> float:
    """``K_{s,d}(x, y)`` for two points of ``R^d``."""
    x = as_point(x, spec.d, name="x")
    y = as_point(y, spec.d, name="y")
    return float(radial_value(spec, np.linalg.norm(x - y)))


def kernel_laplacian_matrix(spec: KernelSpec, X: Any, Y: Any) -> np.ndarray:
    """Laplacian of ``K(., y_j)`` evaluated at ``x_i``.

    ``sign * s * (s + d - 2) * r^(s - 2)``; requires a non-even ``s > 2``.
    """
    spec._require_odd_derivative("Laplacian", 2)
    A, B, _ = _distances(spec, X, Y)
    r = cdist(A, B)
    return spec.sign * spec.s * (spec.s + spec.d - 2) * r ** (spec.s - 2)


def kernel_laplacian(spec: KernelSpec, x: Any, y: Any) -> float:
    """Laplacian of ``K(x, y)`` in its first argument (equal to the one in its second)."""
    x = as_point(x, spec.d, name="x")
    y = as_point(y, spec.d, name="y")
    return float(kernel_laplacian_matrix(spec, x, y)[0, 0])


def kernel_bilaplacian_matrix(spec: KernelSpec, X: Any, Y: Any) -> np.ndarray:
    """Laplacian applied in both arguments; requires a non-even ``s > 4``."""
    spec._require_odd_derivative("bi-Laplacian", 4)
    A, B, _ = _distances(spec, X, Y)
    r = cdist(A, B)
    s, d = spec.s, spec.d
    return spec.sign * s * (s - 2) * (s + d - 2) * (s + d - 4) * r ** (s - 4)


def kernel_bilaplacian(spec: KernelSpec, x: Any, y: Any) -> float:
    x = as_point(x, spec.d, name="x")
    y = as_point(y, spec.d, name="y")
    return float(kernel_bilaplacian_matrix(spec, x, y)[0, 0])


def _psi(spec: KernelSpec, r: np.ndarray) -> np.ndarray:
    """``phi_s'(r) / r``, with the value 0 at ``r = 0`` (valid for ``s > 2``)."""
    positive = r > 0
    safe = np.where(positive, r, 1.0)
    if spec.is_even:
        psi = (spec.s * np.log(safe) + 1.0) * safe ** (spec.s - 2)
    else:
        psi = spec.s * safe ** (spec.s - 2)
    return spec.sign * np.where(positive, psi, 0.0)


def kernel_gradient_matrix(spec: KernelSpec, X: Any, Y: Any) -> np.ndarray:
    """Gradients ``grad_x K(x_i, y_j)``, shape ``(k, l, d)``.

    Requires ``s > 1``. Coincident points are only allowed for ``s > 2``,
    where the gradient vanishes.
    """
    if spec.s <= 1:
        raise UnsupportedDerivativeError(f"gradient not implemented for s={spec.s:g} <= 1")
    A, B, _ = _distances(spec, X, Y)
    diff = A[:, None, :] - B[None, :, :]
    r = np.sqrt(np.sum(diff**2, axis=-1))
    if spec.s <= 2 and np.any(r == 0):
        raise KernelSingularityError(f"kernel gradient is singular at coincident points for s={spec.s:g} <= 2")
    return _psi(spec, r)[..., None] * diff


def kernel_gradient(spec: KernelSpec, x: Any, y: Any) -> np.ndarray:
    """``grad_x K(x, y) = (phi_s'(r) / r) * (x - y)``."""
    x = as_point(x, spec.d, name="x")
    y = as_point(y, spec.d, name="y")
    return kernel_gradient_matrix(spec, x, y)[0, 0]


def kernel_cross_hessian(spec: KernelSpec, x: Any, y: Any) -> np.ndarray:
    """Mixed second derivatives ``d^2 K / dx_a dy_b`` as a ``d x d`` array.

    ``-(psi(r) I + psi'(r)/r (x - y)(x - y)^T)`` with ``psi = phi_s'(r)/r``;
    requires a non-even ``s > 2`` and is zero at ``x = y``.
    """
    spec._require_odd_derivative("mixed second", 2)
    x = as_point(x, spec.d, name="x")
    y = as_point(y, spec.d, name="y")
    diff = x - y
    r = float(np.linalg.norm(diff))
    if r == 0.0:
        return np.zeros((spec.d, spec.d))
    s = spec.s
    psi = spec.sign * s * r ** (s - 2)
    dpsi_over_r = spec.sign * s * (s - 2) * r ** (s - 4)
    return -(psi * np.eye(spec.d) + dpsi_over_r * np.outer(diff, diff))

