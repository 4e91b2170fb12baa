"""Exception hierarchy for :mod:`dartfx.rbf`.

Every error raised on purpose by the package derives from :class:`RbfError`.
Each class also inherits from the closest builtin exception so that callers
can catch either the package error or, e.g., a plain ``ValueError``.
"""

from __future__ import annotations

from typing import Any


class RbfError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(RbfError, ValueError):
    """A point or node set does not have the expected dimension."""


class DuplicateNodesError(RbfError, ValueError):
    """A node set contains coincident points."""


class IncompatibleSpaceError(RbfError, ValueError):
    """The polynomial order is too low for the kernel to be conditionally positive definite."""


class UnsupportedDerivativeError(RbfError, NotImplementedError):
    """A closed-form kernel derivative is not available for this exponent."""


class KernelSingularityError(RbfError, ValueError):
    """A kernel derivative is singular at the requested point."""


class InconsistentFunctionalError(RbfError, ValueError):
    """The polynomial exactness conditions cannot be satisfied on the node set."""

    def __init__(self, message: str, *, functional: Any = None, n_nodes: int | None = None, residual: float | None = None):
        super().__init__(message)
        self.functional = functional
        self.n_nodes = n_nodes
        self.residual = residual


class DefinitenessError(RbfError, ArithmeticError):
    """The reduced matrix ``M^T A M`` is numerically singular."""


class InternalConsistencyError(RbfError, RuntimeError):
    """A residual check that must hold in exact arithmetic failed."""


class ExactnessError(RbfError, ValueError):
    """A weight vector does not reproduce the functional on the polynomial space."""


class DegenerateScalingError(RbfError, ValueError):
    """A node set cannot be rescaled (all nodes coincide)."""


class InvalidNormalError(RbfError, ValueError):
    """A normal vector is not of unit length."""
