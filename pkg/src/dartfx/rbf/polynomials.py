"""Multivariate polynomial spaces with a monomial basis, and node sets.

``PolySpace(d, q)`` is the space of d-variate polynomials of total order at
most ``q`` (total degree at most ``q - 1``). Its basis is the set of monomials
``x^alpha`` with ``|alpha| <= q - 1`` in graded lexicographic order: total
degree ascending, and within a degree the exponent tuples in descending
lexicographic order, so that ``x`` precedes ``y`` (``1, x, y, x^2, xy, y^2``
for ``d = 2``).
"""

from __future__ import annotations

import itertools
import math
from functools import cached_property
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ._base import ArrayModel, as_float_array, as_points
from .errors import DimensionMismatchError, DuplicateNodesError


def graded_exponents(d: int, max_degree: int) -> list[tuple[int, ...]]:
    """Exponent multi-indices of total degree ``<= max_degree`` in graded lexicographic order."""
    exponents: list[tuple[int, ...]] = []
    for degree in range(max_degree + 1):
        grade = [alpha for alpha in itertools.product(range(degree, -1, -1), repeat=d) if sum(alpha) == degree]
        exponents.extend(grade)
    return exponents


class PolySpace(BaseModel):
    """The polynomial space ``P^d_q`` with its fixed monomial basis.

    Attributes
    ----------
    d : int
        Number of variables.
    q : int
        Polynomial order; the basis contains all monomials of degree ``<= q - 1``.
    """

    model_config = ConfigDict(frozen=True)

    d: int = Field(ge=1)
    q: int = Field(ge=1)

    @cached_property
    def exponents(self) -> np.ndarray:
        """``(m, d)`` integer array of basis exponents."""
        exponents = np.array(graded_exponents(self.d, self.q - 1), dtype=int).reshape(-1, self.d)
        exponents.setflags(write=False)
        return exponents

    @property
    def basis(self) -> list[tuple[int, ...]]:
        return [tuple(int(a) for a in alpha) for alpha in self.exponents]

    @property
    def m(self) -> int:
        """Dimension of the space, ``C(q - 1 + d, d)``."""
        return math.comb(self.q - 1 + self.d, self.d)

    def _points(self, x: Any) -> tuple[np.ndarray, bool]:
        return as_points(x, self.d, name="x")


class NodeSet(ArrayModel):
    """An ordered set of ``n`` pairwise distinct points of ``R^d``.

    Attributes
    ----------
    points : numpy.ndarray
        ``(n, d)`` array of node coordinates.
    """

    points: np.ndarray

    @field_validator("points", mode="before")
    @classmethod
    def _coerce_points(cls, value: Any) -> np.ndarray:
        points = as_float_array(value, ndim=2, name="points")
        if points.shape[0] == 0 or points.shape[1] == 0:
            raise DimensionMismatchError(f"points must be a non-empty (n, d) array, got shape {points.shape}")
        if np.unique(points, axis=0).shape[0] != points.shape[0]:
            raise DuplicateNodesError("node set contains coincident points")
        return points

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def d(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return self.n


def _check_space(space: PolySpace, points: np.ndarray) -> None:
    if points.shape[1] != space.d:
        raise DimensionMismatchError(f"points of dimension {points.shape[1]} do not match PolySpace with d={space.d}")


def _monomials(exponents: np.ndarray, points: np.ndarray) -> np.ndarray:
    # (k, m) values of x^alpha; negative exponents never occur because callers mask them
    return np.prod(points[:, None, :] ** exponents[None, :, :], axis=2)


def eval_basis(space: PolySpace, x: Any) -> np.ndarray:
    """Values of the basis monomials at ``x``: length ``m`` for one point, ``(k, m)`` for ``k`` points."""
    points, single = space._points(x)
    values = _monomials(space.exponents, points)
    return values[0] if single else values


def gradient_basis(space: PolySpace, x: Any) -> np.ndarray:
    """Gradients of the basis monomials: ``(m, d)`` for one point, ``(k, m, d)`` for ``k`` points."""
    points, single = space._points(x)
    alpha = space.exponents
    grads = np.empty((points.shape[0], space.m, space.d))
    for i in range(space.d):
        lowered = alpha.copy()
        lowered[:, i] = np.maximum(lowered[:, i] - 1, 0)
        grads[:, :, i] = alpha[:, i] * _monomials(lowered, points)
    return grads[0] if single else grads


def laplacian_basis(space: PolySpace, x: Any) -> np.ndarray:
    """Laplacians of the basis monomials: length ``m`` for one point, ``(k, m)`` for ``k`` points."""
    points, single = space._points(x)
    alpha = space.exponents
    lap = np.zeros((points.shape[0], space.m))
    for i in range(space.d):
        lowered = alpha.copy()
        lowered[:, i] = np.maximum(lowered[:, i] - 2, 0)
        lap += alpha[:, i] * (alpha[:, i] - 1) * _monomials(lowered, points)
    return lap[0] if single else lap


def vandermonde(space: PolySpace, nodes: NodeSet) -> np.ndarray:
    """The ``n x m`` matrix ``P_X = [p_j(x_i)]``."""
    _check_space(space, nodes.points)
    return _monomials(space.exponents, nodes.points)
