"""Linear functionals acting on kernels and polynomials.

A :class:`LinearFunctional` is one of

- ``point_eval``: ``f -> f(x)``
- ``laplacian``: ``f -> (Laplacian f)(x)``
- ``gradient``: ``f -> df/dx_axis (x)``, with a 0-based ``axis``
- ``directional``: ``f -> direction . grad f(x)``

Applied to a kernel it acts on the first argument (``lambda' K``). The
constructors :func:`PointEval`, :func:`LaplacianAt`,
:func:`GradientComponentAt` and :func:`DirectionalDerivativeAt` build the
variants.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, Literal, Optional

import numpy as np
from pydantic import field_validator, model_validator

from ._base import ArrayModel, as_float_array
from .errors import DimensionMismatchError, UnsupportedDerivativeError
from .kernels import (
    KernelSpec,
    kernel_bilaplacian,
    kernel_cross_hessian,
    kernel_gradient_matrix,
    kernel_laplacian_matrix,
    kernel_matrix,
    radial_value,
)
from .polynomials import NodeSet, PolySpace, eval_basis, gradient_basis, laplacian_basis

if TYPE_CHECKING:
    from .geometries import AffineScaling

FunctionalKind = Literal["point_eval", "laplacian", "gradient", "directional"]

_ORDERS: dict[str, int] = {"point_eval": 0, "gradient": 1, "directional": 1, "laplacian": 2}


def _coerce_vector(value: Any, name: str) -> np.ndarray:
    return as_float_array(np.atleast_1d(np.asarray(value, dtype=float)), ndim=1, name=name)


class LinearFunctional(ArrayModel):
    """A point functional of derivative order 0, 1 or 2.

    Attributes
    ----------
    kind : {"point_eval", "laplacian", "gradient", "directional"}
        Which functional.
    x : numpy.ndarray
        The point of ``R^d`` where it acts.
    axis : int | None
        Gradient component (``0 <= axis < d``); present iff ``kind == "gradient"``.
    direction : numpy.ndarray | None
        Direction of a ``directional`` derivative; present iff ``kind == "directional"``.
    """

    kind: FunctionalKind
    x: np.ndarray
    axis: Optional[int] = None
    direction: Optional[np.ndarray] = None

    @field_validator("x", mode="before")
    @classmethod
    def _coerce_x(cls, value: Any) -> np.ndarray:
        return _coerce_vector(value, "x")

    @field_validator("direction", mode="before")
    @classmethod
    def _coerce_direction(cls, value: Any) -> Optional[np.ndarray]:
        return None if value is None else _coerce_vector(value, "direction")

    @model_validator(mode="after")
    def _check_parameters(self) -> "LinearFunctional":
        if self.kind == "gradient":
            if self.axis is None or not 0 <= self.axis < self.d:
                raise ValueError(f"gradient functional needs 0 <= axis < {self.d}, got {self.axis}")
        elif self.axis is not None:
            raise ValueError(f"axis is only allowed for gradient functionals, not {self.kind}")
        if self.kind == "directional":
            if self.direction is None or self.direction.shape != (self.d,):
                raise ValueError(f"directional functional needs a direction in R^{self.d}")
        elif self.direction is not None:
            raise ValueError(f"direction is only allowed for directional functionals, not {self.kind}")
        return self

    @property
    def d(self) -> int:
        return int(self.x.shape[0])

    @property
    def order(self) -> int:
        """Derivative order ``k``."""
        return _ORDERS[self.kind]

    def __str__(self) -> str:
        point = ", ".join(f"{c:g}" for c in self.x)
        if self.kind == "gradient":
            return f"d/dx{self.axis} at ({point})"
        if self.kind == "directional":
            direction = ", ".join(f"{c:g}" for c in self.direction)  # type: ignore[union-attr]
            return f"derivative along ({direction}) at ({point})"
        return f"{self.kind} at ({point})"

    def _check(self, d: int) -> None:
        if d != self.d:
            raise DimensionMismatchError(f"functional acts on R^{self.d}, got dimension {d}")

    def apply_kernel(self, kernel: KernelSpec, nodes: NodeSet) -> np.ndarray:
        """The vector ``a = [lambda' K(x_i)]`` over the nodes."""
        self._check(kernel.d)
        self._check(nodes.d)
        x = self.x.reshape(1, -1)
        if self.kind == "point_eval":
            return kernel_matrix(kernel, x, nodes.points)[0]
        if self.kind == "laplacian":
            return kernel_laplacian_matrix(kernel, x, nodes.points)[0]
        grads = kernel_gradient_matrix(kernel, x, nodes.points)[0]
        if self.kind == "gradient":
            return grads[:, self.axis]
        return grads @ self.direction

    def apply_basis(self, space: PolySpace) -> np.ndarray:
        """The vector ``b = [lambda p_j]`` over the basis of ``space``."""
        self._check(space.d)
        if self.kind == "point_eval":
            return eval_basis(space, self.x)
        if self.kind == "laplacian":
            return laplacian_basis(space, self.x)
        grads = gradient_basis(space, self.x)
        if self.kind == "gradient":
            return grads[:, self.axis]
        return grads @ self.direction

    def apply_twice(self, kernel: KernelSpec) -> float:
        """``D' D'' K(x, x)``: the functional applied to both kernel arguments at its own point.

        Exists for polyharmonic kernels when ``s > 2k``.
        """
        self._check(kernel.d)
        if kernel.s <= 2 * self.order:
            raise UnsupportedDerivativeError(
                f"{self.kind} needs s > {2 * self.order} for a finite worst case error, got s={kernel.s:g}"
            )
        if self.kind == "point_eval":
            return float(radial_value(kernel, 0.0))
        if self.kind == "laplacian":
            return kernel_bilaplacian(kernel, self.x, self.x)
        hessian = kernel_cross_hessian(kernel, self.x, self.x)
        if self.kind == "gradient":
            return float(hessian[self.axis, self.axis])
        return float(self.direction @ hessian @ self.direction)

    def rescaled(self, scaling: "AffineScaling") -> "LinearFunctional":
        """The same functional acting at the image ``(x - z) / h`` of its point."""
        return self.model_copy(update={"x": _coerce_vector(scaling.apply(self.x), "x")})


def PointEval(x: Any) -> LinearFunctional:
    return LinearFunctional(kind="point_eval", x=x)


def LaplacianAt(x: Any) -> LinearFunctional:
    return LinearFunctional(kind="laplacian", x=x)


def GradientComponentAt(x: Any, axis: int) -> LinearFunctional:
    return LinearFunctional(kind="gradient", x=x, axis=axis)


def DirectionalDerivativeAt(x: Any, direction: Any) -> LinearFunctional:
    return LinearFunctional(kind="directional", x=x, direction=direction)
