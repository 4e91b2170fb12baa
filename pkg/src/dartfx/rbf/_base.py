"""Pydantic base model for values that carry numpy arrays.

Domain values in this package (node sets, null space bases, weight reports,
interpolants, ...) are immutable pydantic models whose fields are numpy
arrays. This module provides the shared configuration and the coercion
helpers used by their validators.

The core components are:

- :class:`ArrayModel`: a frozen :class:`pydantic.BaseModel` allowing arbitrary
  (numpy) field types. Arrays assigned to its fields are made read-only so
  that instances can be shared between threads.

- :func:`as_float_array`, :func:`as_point`: coercion of list or array input
  to float arrays of a required dimensionality.

Basic Usage
-----------

Declare array fields with a ``field_validator`` that coerces the input::

    from pydantic import field_validator
    from dartfx.rbf._base import ArrayModel, as_float_array

    class Samples(ArrayModel):
        values: np.ndarray

        @field_validator("values", mode="before")
        @classmethod
        def _coerce(cls, value):
            return as_float_array(value, ndim=1, name="values")

    samples = Samples(values=[1, 2, 3])
    samples.values.dtype  # float64
    samples.values.flags.writeable  # False

Notes
-----
- Equality of two ArrayModel instances compares their arrays element-wise.
- Arrays are copied on coercion; the caller's array is never frozen in place.
"""

from __future__ import annotations

from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from .errors import DimensionMismatchError


class ArrayModel(BaseModel):
    """Frozen pydantic model with numpy array fields."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def __eq__(self, other: object) -> bool:
        if type(self) is not type(other):
            return NotImplemented
        for name in type(self).model_fields:
            mine, theirs = getattr(self, name), getattr(other, name)
            if isinstance(mine, np.ndarray) or isinstance(theirs, np.ndarray):
                if not np.array_equal(np.asarray(mine), np.asarray(theirs)):
                    return False
            elif mine != theirs:
                return False
        return True

    __hash__ = None  # type: ignore[assignment]


def as_float_array(value: Any, *, ndim: Optional[int] = None, name: str = "array") -> np.ndarray:
    """Copy ``value`` into a read-only float64 array, checking its dimensionality.

    Parameters
    ----------
    value : array_like
        Input data.
    ndim : int | None, optional
        Required number of array dimensions. Not checked when None.
    name : str, optional
        Field name used in error messages.

    Returns
    -------
    numpy.ndarray
        A read-only float64 copy of ``value``.

    Raises
    ------
    DimensionMismatchError
        If ``value`` does not have ``ndim`` dimensions.
    """
    array = np.array(value, dtype=float, copy=True)
    if ndim is not None and array.ndim != ndim:
        raise DimensionMismatchError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    array.setflags(write=False)
    return array


def as_point(x: Any, d: int, *, name: str = "x") -> np.ndarray:
    """Coerce ``x`` to a point of ``R^d`` (a 1-D float array of length d)."""
    point = np.asarray(x, dtype=float)
    if point.ndim == 0 and d == 1:
        point = point.reshape(1)
    if point.shape != (d,):
        raise DimensionMismatchError(f"{name} must be a point in R^{d}, got shape {point.shape}")
    return point


def as_points(x: Any, d: int, *, name: str = "x") -> tuple[np.ndarray, bool]:
    """Coerce ``x`` to a ``(k, d)`` array of points.

    Returns the array and a flag telling whether ``x`` was a single point, so
    that vectorised callers can return a scalar result for scalar input.
    """
    points = np.asarray(x, dtype=float)
    if points.ndim == 0 and d == 1:
        return points.reshape(1, 1), True
    if points.ndim == 1:
        if d == 1 and points.shape[0] != 1:
            return points.reshape(-1, 1), False
        if points.shape != (d,):
            raise DimensionMismatchError(f"{name} must be a point in R^{d}, got shape {points.shape}")
        return points.reshape(1, d), True
    if points.ndim != 2 or points.shape[1] != d:
        raise DimensionMismatchError(f"{name} must be an array of points in R^{d}, got shape {points.shape}")
    return points, False
