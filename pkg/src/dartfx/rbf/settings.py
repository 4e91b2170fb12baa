"""Numerical tolerances shared by the solvers and the recovery pipeline."""

from __future__ import annotations

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class Tolerances(BaseModel):
    """Tolerances used for rank decisions and residual checks.

    Attributes
    ----------
    rank_rtol : float | None
        Relative singular value cutoff for rank decisions. ``None`` selects
        ``max(n, m) * eps`` for an ``n x m`` matrix.
    consistency_rtol : float
        Relative residual accepted when testing ``b in R(B^T)``.
    residual_rtol : float
        Relative residual accepted for the second block of the saddle system.
    kkt_rcond : float
        Singular value cutoff of the least squares KKT solve.
    exactness_rtol : float
        Relative residual accepted when checking polynomial exactness of weights.
    clamp_rtol, clamp_atol : float
        Window below zero in which a squared worst case error is clamped to 0.
    normal_atol : float
        Accepted deviation of a normal vector from unit length.
    """

    model_config = ConfigDict(frozen=True)

    rank_rtol: Optional[float] = Field(default=None, gt=0)
    consistency_rtol: float = Field(default=1e-8, gt=0)
    residual_rtol: float = Field(default=1e-7, gt=0)
    kkt_rcond: float = Field(default=1e-12, gt=0)
    exactness_rtol: float = Field(default=1e-8, gt=0)
    clamp_rtol: float = Field(default=1e-8, ge=0)
    clamp_atol: float = Field(default=1e-12, ge=0)
    normal_atol: float = Field(default=1e-10, gt=0)

    def rank_cutoff(self, shape: tuple[int, ...], sigma_max: float) -> float:
        """Absolute singular value threshold for a matrix of the given shape."""
        rtol = self.rank_rtol if self.rank_rtol is not None else max(shape) * np.finfo(float).eps
        return rtol * sigma_max


DEFAULT_TOLERANCES = Tolerances()
