"""Node sets, test data and coordinate transforms for the experiments.

- :func:`grid_nodes` enumerates the lattice ball ``Z_{d,r}``, the integer
  points of ``R^d`` with ``||alpha||_2 <= r``.
- :func:`ellipse_nodes` samples jittered points on an ellipse.
- :func:`prescale` maps a node set to a well-conditioned position, either by
  ``x -> x / r`` (:class:`GridByR`, ``r`` defaulting to the largest node
  norm) or by centring at the centre of gravity and dividing by the largest
  distance to it (:class:`Centroid`).

Random numbers come from numpy's PCG64 generator. The stream used for an
ellipse set of ``n`` nodes is derived from ``SeedSequence(seed,
spawn_key=(n,))``, so every set size has its own reproducible stream.
"""

from __future__ import annotations

import itertools
import logging
import math
from typing import Annotated, Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ._base import ArrayModel, as_float_array, as_points
from .errors import DegenerateScalingError, DimensionMismatchError
from .polynomials import NodeSet

logger = logging.getLogger(__name__)

_LATTICE_SLACK = 1e-9


class AffineScaling(ArrayModel):
    """The map ``x -> (x - z) / h``.

    Attributes
    ----------
    shift : numpy.ndarray
        The point ``z``.
    scale : float
        The factor ``h > 0``.
    """

    shift: np.ndarray
    scale: float = Field(gt=0)

    @field_validator("shift", mode="before")
    @classmethod
    def _coerce_shift(cls, value: Any) -> np.ndarray:
        return as_float_array(np.atleast_1d(np.asarray(value, dtype=float)), ndim=1, name="shift")

    @property
    def d(self) -> int:
        return int(self.shift.shape[0])

    def apply(self, x: Any) -> np.ndarray:
        points, single = as_points(x, self.d)
        y = (points - self.shift) / self.scale
        return y[0] if single else y

    def invert(self, y: Any) -> np.ndarray:
        points, single = as_points(y, self.d)
        x = self.shift + self.scale * points
        return x[0] if single else x

    def apply_nodes(self, nodes: NodeSet) -> NodeSet:
        return NodeSet(points=self.apply(nodes.points).reshape(nodes.n, nodes.d))

    def invert_nodes(self, nodes: NodeSet) -> NodeSet:
        return NodeSet(points=self.invert(nodes.points).reshape(nodes.n, nodes.d))

    def pull_back_weights(self, weights: np.ndarray, order: int) -> np.ndarray:
        """Weights for the original nodes from weights computed on scaled nodes: ``h^(-k) w``."""
        return np.asarray(weights) / self.scale**order


class GridByR(BaseModel):
    """Scale about the origin: ``z = 0``, ``h = r``.

    Without ``r`` the radius the nodes actually reach, ``max ||x_i||_2``, is
    used. For ``Z_{d,sqrt 3}`` in the plane that is ``sqrt 2``.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["grid_by_r"] = "grid_by_r"
    r: Optional[float] = Field(default=None, gt=0)


class Centroid(BaseModel):
    """Centre at the centre of gravity ``z`` and divide by ``max ||x_i - z||_2``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["centroid"] = "centroid"


ScalingConvention = Annotated[Union[GridByR, Centroid], Field(discriminator="kind")]


def prescale(nodes: NodeSet, convention: ScalingConvention) -> tuple[NodeSet, AffineScaling]:
    """Rescale ``nodes`` according to ``convention``.

    Returns the scaled node set and the transform that produced it.

    Raises
    ------
    DegenerateScalingError
        When every node coincides with the centre: the centroid for
        :class:`Centroid`, the origin for :class:`GridByR` without ``r``.
    """
    if isinstance(convention, GridByR):
        h = convention.r
        if h is None:
            h = float(np.max(np.linalg.norm(nodes.points, axis=1)))
            if h == 0.0:
                raise DegenerateScalingError(f"cannot rescale {nodes.n} node(s) that all lie at the origin")
        scaling = AffineScaling(shift=np.zeros(nodes.d), scale=h)
    else:
        z = nodes.points.mean(axis=0)
        h = float(np.max(np.linalg.norm(nodes.points - z, axis=1)))
        if h == 0.0:
            raise DegenerateScalingError(f"cannot rescale {nodes.n} node(s) that all coincide with their centroid")
        scaling = AffineScaling(shift=z, scale=h)
    logger.debug("prescale: %s -> shift %s, scale %.6g", type(convention).__name__, scaling.shift, scaling.scale)
    return scaling.apply_nodes(nodes), scaling


def grid_nodes(d: int, r: float) -> NodeSet:
    """The lattice ball ``Z_{d,r} = {alpha in Z^d : ||alpha||_2 <= r}``.

    Nodes are ordered shell by shell (increasing ``||alpha||_2^2``) and within
    a shell by coordinates, largest magnitude first and positive before
    negative, so ``Z_{2,1}`` is ``0, e1, -e1, e2, -e2``.
    """
    if d < 1:
        raise DimensionMismatchError(f"dimension must be >= 1, got {d}")
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")
    bound = r * r + _LATTICE_SLACK
    extent = math.floor(r + _LATTICE_SLACK)
    members = [
        alpha
        for alpha in itertools.product(range(-extent, extent + 1), repeat=d)
        if sum(a * a for a in alpha) <= bound
    ]
    members.sort(key=lambda alpha: (sum(a * a for a in alpha), tuple((-abs(a), -a) for a in alpha)))
    return NodeSet(points=np.array(members, dtype=float).reshape(-1, d))


class EllipseSpec(BaseModel):
    """Jittered samples on the ellipse ``x^2/a^2 + y^2/b^2 = 1``.

    Attributes
    ----------
    a, b_axis : float
        Semi-axes.
    n : int
        Number of nodes.
    jitter : float
        Parameter perturbations are uniform in ``[-jitter * h, jitter * h]``
        with ``h = 2 pi / n``; ``0 <= jitter < 0.5`` keeps nodes ordered and distinct.
    seed : int
        Seed of the random stream.
    """

    model_config = ConfigDict(frozen=True)

    a: float = Field(default=1.0, gt=0)
    b_axis: float = Field(default=0.75, gt=0)
    n: int = Field(ge=1)
    jitter: float = Field(default=0.3, ge=0, lt=0.5)
    seed: int = Field(default=0, ge=0)

    @property
    def step(self) -> float:
        """Parameter step ``h = 2 pi / n``."""
        return 2.0 * math.pi / self.n

    def point(self, t: Any) -> np.ndarray:
        """Points ``(a cos t, b sin t)`` for scalar or array ``t``."""
        t = np.asarray(t, dtype=float)
        return np.stack([self.a * np.cos(t), self.b_axis * np.sin(t)], axis=-1)

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.n,))))


def ellipse_nodes(spec: EllipseSpec) -> tuple[NodeSet, np.ndarray]:
    """Nodes ``x_i = (a cos(t_i + e_i), b sin(t_i + e_i))`` with ``t_i = i h``.

    Returns the node set and the perturbed parameters ``t_i + e_i``.
    """
    h = spec.step
    t = np.arange(spec.n) * h
    eps = spec.rng().uniform(-spec.jitter * h, spec.jitter * h, size=spec.n) if spec.jitter > 0 else np.zeros(spec.n)
    params = t + eps
    return NodeSet(points=spec.point(params)), params


def ellipse_normal(spec: EllipseSpec, t: Any) -> np.ndarray:
    """Unit outer normal at parameter ``t``: the normalised ``(cos t / a, sin t / b)``."""
    t = np.asarray(t, dtype=float)
    normal = np.stack([np.cos(t) / spec.a, np.sin(t) / spec.b_axis], axis=-1)
    return normal / np.linalg.norm(normal, axis=-1, keepdims=True)


def ellipse_samples(spec: EllipseSpec, refinement: int = 20) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Equidistant parameters with step ``h / refinement``, their points and normals."""
    t = np.arange(spec.n * refinement) * (spec.step / refinement)
    return t, spec.point(t), ellipse_normal(spec, t)


def test_function(x: Any, y: Any) -> Any:
    """``f(x, y) = sin(pi x) sin(pi y)``."""
    return np.sin(np.pi * np.asarray(x, dtype=float)) * np.sin(np.pi * np.asarray(y, dtype=float))


def test_function_gradient(x: Any, y: Any) -> np.ndarray:
    """``(pi cos(pi x) sin(pi y), pi sin(pi x) cos(pi y))``, stacked on the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.stack(
        [np.pi * np.cos(np.pi * x) * np.sin(np.pi * y), np.pi * np.sin(np.pi * x) * np.cos(np.pi * y)], axis=-1
    )


# keep pytest from collecting the test function as a test
test_function.__test__ = False  # type: ignore[attr-defined]
test_function_gradient.__test__ = False  # type: ignore[attr-defined]
