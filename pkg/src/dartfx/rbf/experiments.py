"""Experiment runners and table emitters.

Two experiments are provided:

- the *grid* experiment approximates the Laplacian at the origin from the
  values on a lattice ball ``Z_{d,r}`` with the kernel ``K_{7,d}`` and
  cubic polynomials (``q = 4``), reporting the nullities of ``P_X``, the
  worst case error, the 1-norm of the weights and the condition number;
- the *ellipse* experiment interpolates ``sin(pi x) sin(pi y)`` on jittered
  nodes of an ellipse and reports the maximum error of the interpolant and
  of its surface gradient on a fine sample of the curve.

A third runner exports the ellipse node sets themselves (``nodes``).

Each runner returns a list of frozen row models in configuration order. Rows
that cannot be computed are kept with a status and a message instead of
aborting the run. :func:`write_rows` and :func:`read_rows` store rows as CSV
(``-`` for missing values); :func:`render_table` formats them for a terminal.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Iterable, Literal, Optional, Sequence, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import InconsistentFunctionalError, RbfError
from .functionals import LaplacianAt
from .geometries import (
    EllipseSpec,
    GridByR,
    ellipse_nodes,
    ellipse_samples,
    grid_nodes,
    prescale,
    test_function,
    test_function_gradient,
)
from .kernels import KernelSpec
from .polynomials import PolySpace, vandermonde
from .recovery import differentiation_weights, eval_interpolant, fit_interpolant, project_tangent, surface_gradient
from .saddle import rank_nullity
from .settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

ExperimentKind = Literal["grid", "ellipse", "nodes"]
OutputFormat = Literal["csv", "markdown"]

DEFAULT_RADII: tuple[float, ...] = (1.0, math.sqrt(2.0), math.sqrt(3.0), 2.0)
DEFAULT_PAIRS: tuple[tuple[float, int], ...] = ((5.0, 3), (7.0, 4), (9.0, 5))
DEFAULT_SIZES: tuple[int, ...] = tuple(5 * 2**i for i in range(7))
DEFAULT_NODE_SIZES: tuple[int, ...] = (5, 10)


class ExperimentConfig(BaseModel):
    """Parameters of one experiment run.

    The defaults reproduce the published configurations: ``d = 2..5`` and
    ``r in {1, sqrt 2, sqrt 3, 2}`` with ``K_{7,d}`` and ``q = 4`` for the
    grid, and ``(s, q) in {(5, 3), (7, 4), (9, 5)}`` with ``|X| = 5 * 2^i``,
    ``i = 0..6``, for the ellipse.

    Attributes
    ----------
    experiment : {"grid", "ellipse", "nodes"}
        Which runner to use.
    dims, radii : tuple
        Grid dimensions and lattice radii.
    s, q : float, int
        Kernel exponent and polynomial order of the grid experiment.
    pairs : tuple of (s, q)
        Kernel exponent and polynomial order pairs of the ellipse experiment.
    sizes : tuple of int
        Ellipse node counts.
    seed, jitter, refinement : int, float, int
        Random stream seed, parameter jitter fraction and number of error
        samples per parameter step.
    output_format : {"csv", "markdown"}
        File format of :func:`write_rows`.
    out : pathlib.Path | None
        Output file; None writes nothing.
    jobs : int
        Number of worker threads.
    """

    model_config = ConfigDict(frozen=True)

    experiment: ExperimentKind = "grid"
    dims: tuple[int, ...] = (2, 3, 4, 5)
    radii: tuple[float, ...] = DEFAULT_RADII
    s: float = Field(default=7.0, gt=0)
    q: int = Field(default=4, ge=1)
    pairs: tuple[tuple[float, int], ...] = DEFAULT_PAIRS
    sizes: tuple[int, ...] = DEFAULT_SIZES
    seed: int = Field(default=0, ge=0)
    jitter: float = Field(default=0.3, ge=0, lt=0.5)
    refinement: int = Field(default=20, ge=1)
    output_format: OutputFormat = "csv"
    out: Optional[Path] = None
    jobs: int = Field(default=1, ge=1)

    @field_validator("dims")
    @classmethod
    def _check_dims(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value or any(d < 1 for d in value):
            raise ValueError(f"dimensions must be a non-empty list of integers >= 1, got {value}")
        return value

    @field_validator("radii")
    @classmethod
    def _check_radii(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value or any(not r > 0 for r in value):
            raise ValueError(f"radii must be a non-empty list of positive numbers, got {value}")
        return value

    @field_validator("sizes")
    @classmethod
    def _check_sizes(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value or any(n < 1 for n in value):
            raise ValueError(f"node counts must be a non-empty list of integers >= 1, got {value}")
        return value

    @model_validator(mode="after")
    def _check_orders(self) -> "ExperimentConfig":
        if self.experiment == "grid":
            checks = [(self.s, self.q)]
        elif self.experiment == "ellipse":
            checks = list(self.pairs)
        else:
            checks = []
        if self.experiment == "ellipse" and not self.pairs:
            raise ValueError("the ellipse experiment needs at least one (s, q) pair")
        for s, q in checks:
            kernel = KernelSpec(s=s, d=2)
            if not kernel.is_compatible(q):
                raise ValueError(f"q={q} is below floor(s/2) + 1 = {kernel.min_order} for s={s:g}")
        return self


class GridRow(BaseModel):
    """One row of the grid experiment. Missing values are None."""

    model_config = ConfigDict(frozen=True)

    d: int
    r: float
    n_nodes: int
    dim_n_px: Optional[int] = None
    dim_n_pxt: Optional[int] = None
    error: Optional[float] = None
    l1: Optional[float] = None
    cond: Optional[float] = None
    status: Literal["ok", "inconsistent", "failed"] = "ok"
    message: str = ""


class EllipseRow(BaseModel):
    """One row of the ellipse experiment; ``skipped`` rows have ``|X| < 2q - 1``."""

    model_config = ConfigDict(frozen=True)

    s: float
    q: int
    n_nodes: int
    max_error: Optional[float] = None
    max_grad_error: Optional[float] = None
    cond: Optional[float] = None
    status: Literal["ok", "skipped", "failed"] = "ok"
    message: str = ""


class NodeRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    index: int
    t: float
    x: float
    y: float


Row = Union[GridRow, EllipseRow, NodeRow]
RowT = TypeVar("RowT", GridRow, EllipseRow, NodeRow)
_T = TypeVar("_T")
_R = TypeVar("_R")

_FAILED_STATUSES = {"inconsistent", "failed"}


def _parallel_map(func: Callable[[_T], _R], items: Sequence[_T], jobs: int) -> list[_R]:
    # executor.map yields in submission order
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(func, items))


def grid_row(d: int, r: float, s: float = 7.0, q: int = 4, *, tolerances: Tolerances = DEFAULT_TOLERANCES) -> GridRow:
    """Laplacian at the origin from the values on ``Z_{d,r}``.

    The system is solved on ``Z_{d,r} / h`` with ``h`` the largest node norm, so
    radii that enumerate the same lattice points give the same row.
    """
    nodes = grid_nodes(d, r)
    kernel = KernelSpec(s=s, d=d)
    space = PolySpace(d=d, q=q)
    # r < 1 leaves the origin alone
    convention = GridByR() if nodes.n > 1 else GridByR(r=r)
    scaled, _ = prescale(nodes, convention)
    _, dim_n_px, dim_n_pxt = rank_nullity(vandermonde(space, scaled), tolerances=tolerances)
    partial = {"d": d, "r": r, "n_nodes": nodes.n, "dim_n_px": dim_n_px, "dim_n_pxt": dim_n_pxt}
    try:
        report = differentiation_weights(
            nodes, LaplacianAt(np.zeros(d)), kernel, space, prescale=convention, tolerances=tolerances
        )
    except InconsistentFunctionalError as exc:
        logger.warning("grid d=%d r=%.6g: %s", d, r, exc)
        return GridRow(**partial, status="inconsistent", message=str(exc))
    except RbfError as exc:
        logger.warning("grid d=%d r=%.6g failed: %s", d, r, exc)
        return GridRow(**partial, status="failed", message=str(exc))
    return GridRow(**partial, error=report.error, l1=report.l1, cond=report.cond)


def run_grid_experiment(config: ExperimentConfig, *, tolerances: Tolerances = DEFAULT_TOLERANCES) -> list[GridRow]:
    """One row per ``(d, r)``, dimensions outermost."""
    cases = [(d, r) for d in config.dims for r in config.radii]
    logger.info("grid experiment: %d rows, s=%g, q=%d", len(cases), config.s, config.q)
    return _parallel_map(lambda case: grid_row(case[0], case[1], config.s, config.q, tolerances=tolerances), cases, config.jobs)


def ellipse_row(
    s: float,
    q: int,
    n: int,
    *,
    seed: int = 0,
    jitter: float = 0.3,
    refinement: int = 20,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EllipseRow:
    """Interpolate the test function on ``n`` ellipse nodes and measure the errors.

    ``max_error`` is the largest ``|f - sigma|`` and ``max_grad_error`` the
    largest 2-norm of the surface gradient error, both over ``refinement * n``
    equidistant parameter samples.
    """
    if n < 2 * q - 1:
        return EllipseRow(s=s, q=q, n_nodes=n, status="skipped", message=f"|X| = {n} < 2q - 1 = {2 * q - 1}")
    spec = EllipseSpec(n=n, jitter=jitter, seed=seed)
    nodes, _ = ellipse_nodes(spec)
    values = test_function(nodes.points[:, 0], nodes.points[:, 1])
    try:
        interp = fit_interpolant(nodes, values, KernelSpec(s=s, d=2), PolySpace(d=2, q=q), tolerances=tolerances)
    except RbfError as exc:
        logger.warning("ellipse s=%g q=%d n=%d failed: %s", s, q, n, exc)
        return EllipseRow(s=s, q=q, n_nodes=n, status="failed", message=str(exc))

    _, samples, normals = ellipse_samples(spec, refinement)
    exact = test_function(samples[:, 0], samples[:, 1])
    max_error = float(np.max(np.abs(exact - eval_interpolant(interp, samples))))
    exact_grad = project_tangent(test_function_gradient(samples[:, 0], samples[:, 1]), normals, tolerances=tolerances)
    grad_error = exact_grad - surface_gradient(interp, samples, normals, tolerances=tolerances)
    max_grad_error = float(np.max(np.linalg.norm(grad_error, axis=1)))
    logger.debug("ellipse s=%g q=%d n=%d: max %.2e, maxg %.2e, cond %s", s, q, n, max_error, max_grad_error, interp.cond)
    return EllipseRow(s=s, q=q, n_nodes=n, max_error=max_error, max_grad_error=max_grad_error, cond=interp.cond)


def run_ellipse_experiment(config: ExperimentConfig, *, tolerances: Tolerances = DEFAULT_TOLERANCES) -> list[EllipseRow]:
    """One row per ``((s, q), |X|)``, pairs outermost."""
    cases = [(s, q, n) for s, q in config.pairs for n in config.sizes]
    logger.info("ellipse experiment: %d rows, seed=%d, jitter=%g", len(cases), config.seed, config.jitter)

    def run(case: tuple[float, int, int]) -> EllipseRow:
        s, q, n = case
        return ellipse_row(
            s, q, n, seed=config.seed, jitter=config.jitter, refinement=config.refinement, tolerances=tolerances
        )

    return _parallel_map(run, cases, config.jobs)


def export_ellipse_nodes(config: ExperimentConfig) -> list[NodeRow]:
    """The node coordinates of the ellipse sets of every size in ``config.sizes``."""
    rows: list[NodeRow] = []
    for n in config.sizes:
        nodes, params = ellipse_nodes(EllipseSpec(n=n, jitter=config.jitter, seed=config.seed))
        rows.extend(
            NodeRow(n=n, index=i, t=float(params[i]), x=float(point[0]), y=float(point[1]))
            for i, point in enumerate(nodes.points)
        )
    return rows


def run_experiment(config: ExperimentConfig, *, tolerances: Tolerances = DEFAULT_TOLERANCES) -> list[Any]:
    if config.experiment == "grid":
        return run_grid_experiment(config, tolerances=tolerances)
    if config.experiment == "ellipse":
        return run_ellipse_experiment(config, tolerances=tolerances)
    return export_ellipse_nodes(config)


def all_computed(rows: Iterable[Row]) -> bool:
    """True when no row failed; skipped rows count as computed."""
    return not any(getattr(row, "status", "ok") in _FAILED_STATUSES for row in rows)


# --- CSV and table output ---------------------------------------------------

MISSING = "-"


def _csv_value(value: Any) -> str:
    if value is None:
        return MISSING
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _row_type(rows: Sequence[Row]) -> type[BaseModel]:
    kinds = {type(row) for row in rows}
    if len(kinds) != 1:
        raise ValueError(f"rows must all have the same type, got {sorted(k.__name__ for k in kinds)}")
    return kinds.pop()


def write_rows(rows: Sequence[Row], path: Union[str, Path], output_format: OutputFormat = "csv") -> Path:
    """Write ``rows`` as CSV (full precision) or as a markdown table."""
    path = Path(path)
    if not rows:
        raise ValueError("no rows to write")
    fields = list(_row_type(rows).model_fields)
    path.parent.mkdir(parents=True, exist_ok=True)
    if output_format == "csv":
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=fields)
            writer.writeheader()
            for row in rows:
                writer.writerow({name: _csv_value(getattr(row, name)) for name in fields})
    elif output_format == "markdown":
        path.write_text(render_markdown(rows), encoding="utf-8")
    else:
        raise ValueError(f"unknown output format {output_format!r}")
    logger.info("wrote %d rows to %s", len(rows), path)
    return path


def read_rows(path: Union[str, Path], row_type: type[RowT]) -> list[RowT]:
    """Parse a CSV file written by :func:`write_rows` back into row models."""
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        expected = list(row_type.model_fields)
        if reader.fieldnames != expected:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}, expected {expected}")
        return [
            row_type.model_validate({k: (None if v == MISSING and k != "message" else v) for k, v in record.items()})
            for record in reader
        ]


def _sci(value: Optional[float]) -> str:
    return MISSING if value is None else f"{value:.1e}"


def _fixed(value: Optional[float]) -> str:
    return MISSING if value is None else f"{value:.1f}"


def _plain(value: Any) -> str:
    return MISSING if value is None else str(value)


def format_radius(r: float) -> str:
    """``2`` for integral radii, ``sqrt3`` for square roots of integers, else ``%g``."""
    if float(r).is_integer():
        return str(int(r))
    square = round(r * r)
    if abs(r * r - square) < 1e-9:
        return f"sqrt{square}"
    return f"{r:g}"


_Column = tuple[str, Callable[[Any], str]]

_COLUMNS: dict[type, list[_Column]] = {
    GridRow: [
        ("d", lambda row: str(row.d)),
        ("r", lambda row: format_radius(row.r)),
        ("|X|", lambda row: str(row.n_nodes)),
        ("dN", lambda row: _plain(row.dim_n_px)),
        ("dNt", lambda row: _plain(row.dim_n_pxt)),
        ("E(w)", lambda row: _fixed(row.error)),
        ("|w|_1", lambda row: _fixed(row.l1)),
        ("cond", lambda row: _sci(row.cond)),
        ("status", lambda row: row.status),
    ],
    EllipseRow: [
        ("s", lambda row: f"{row.s:g}"),
        ("q", lambda row: str(row.q)),
        ("|X|", lambda row: str(row.n_nodes)),
        ("max", lambda row: _sci(row.max_error)),
        ("maxg", lambda row: _sci(row.max_grad_error)),
        ("cond", lambda row: _sci(row.cond)),
        ("status", lambda row: row.status),
    ],
    NodeRow: [
        ("n", lambda row: str(row.n)),
        ("i", lambda row: str(row.index)),
        ("t", lambda row: f"{row.t:.6f}"),
        ("x", lambda row: f"{row.x:.6f}"),
        ("y", lambda row: f"{row.y:.6f}"),
    ],
}


def _cells(rows: Sequence[Row]) -> tuple[list[str], list[list[str]]]:
    columns = _COLUMNS[_row_type(rows)]
    return [header for header, _ in columns], [[cell(row) for _, cell in columns] for row in rows]


def render_table(rows: Sequence[Row]) -> str:
    """Aligned plain-text table: 2 significant digits for errors and cond, 1 decimal for E and ``||w||_1``."""
    if not rows:
        return ""
    headers, body = _cells(rows)
    widths = [max(len(line[i]) for line in [headers, *body]) for i in range(len(headers))]
    lines = ["  ".join(cell.rjust(width) for cell, width in zip(line, widths)).rstrip() for line in [headers, *body]]
    return "\n".join(lines) + "\n"


def render_markdown(rows: Sequence[Row]) -> str:
    if not rows:
        return ""
    headers, body = _cells(rows)
    lines = ["| " + " | ".join(headers) + " |", "|" + "|".join("---" for _ in headers) + "|"]
    lines.extend("| " + " | ".join(line) + " |" for line in body)
    return "\n".join(lines) + "\n"
