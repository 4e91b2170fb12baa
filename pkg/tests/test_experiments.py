from __future__ import annotations

import math
from pathlib import Path

import pytest
from pydantic import ValidationError

from dartfx.rbf.cli import main, parse_pair, parse_radius
from dartfx.rbf.experiments import (
    EllipseRow,
    ExperimentConfig,
    GridRow,
    NodeRow,
    all_computed,
    ellipse_row,
    export_ellipse_nodes,
    format_radius,
    grid_row,
    read_rows,
    render_markdown,
    render_table,
    run_ellipse_experiment,
    run_grid_experiment,
    write_rows,
)

SQRT2 = math.sqrt(2.0)

# (s, q) -> |X| -> (max, maxg) of the published ellipse runs
ELLIPSE_REFERENCE = {
    (5.0, 3): {20: (2.9e-3, 2.0e-2), 40: (4.6e-5, 6.9e-4), 80: (1.0e-6, 3.1e-5)},
    (7.0, 4): {20: (1.6e-3, 1.1e-2), 40: (2.2e-6, 3.6e-5), 80: (1.4e-8, 3.5e-7)},
    (9.0, 5): {20: (1.6e-3, 1.5e-2), 40: (6.1e-7, 1.4e-5)},
}


def within_factor(value: float, reference: float, factor: float = 10.0) -> bool:
    return reference / factor <= value <= reference * factor


def test_config_defaults() -> None:
    config = ExperimentConfig()
    assert config.dims == (2, 3, 4, 5)
    assert config.radii == pytest.approx((1.0, SQRT2, math.sqrt(3.0), 2.0))
    assert (config.s, config.q) == (7.0, 4)
    assert config.pairs == ((5.0, 3), (7.0, 4), (9.0, 5))
    assert config.sizes == (5, 10, 20, 40, 80, 160, 320)
    assert (config.jitter, config.refinement) == (0.3, 20)


def test_config_validation() -> None:
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment="grid", s=7, q=3)
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment="ellipse", pairs=[(9, 4)])
    with pytest.raises(ValidationError):
        ExperimentConfig(radii=[0.0])
    with pytest.raises(ValidationError):
        ExperimentConfig(jobs=0)


def test_grid_rows() -> None:
    rows = run_grid_experiment(ExperimentConfig(dims=[2, 5], radii=[SQRT2, math.sqrt(3.0)], jobs=2))
    assert [(row.d, row.r) for row in rows] == [(2, SQRT2), (2, math.sqrt(3.0)), (5, SQRT2), (5, math.sqrt(3.0))]
    first, _, third, _ = rows
    assert (first.n_nodes, first.dim_n_px, first.dim_n_pxt) == (9, 2, 1)
    assert first.error == pytest.approx(10.6, abs=0.05)
    assert first.l1 == pytest.approx(13.5, abs=0.05)
    assert (third.n_nodes, third.dim_n_px, third.dim_n_pxt) == (51, 15, 10)
    assert third.error == pytest.approx(15.6, abs=0.05)
    assert third.l1 == pytest.approx(40.9, abs=0.05)
    assert all_computed(rows)


def test_grid_rows_depend_on_lattice_points_only() -> None:
    wide, narrow = grid_row(2, math.sqrt(3.0)), grid_row(2, SQRT2)
    assert (wide.n_nodes, wide.dim_n_px, wide.dim_n_pxt, wide.status) == (narrow.n_nodes, narrow.dim_n_px, narrow.dim_n_pxt, "ok")
    assert (wide.error, wide.l1, wide.cond) == pytest.approx((narrow.error, narrow.l1, narrow.cond), rel=1e-10)
    assert 1.0e2 <= wide.cond <= 4.0e2


def test_grid_row_without_consistency() -> None:
    row = grid_row(2, 0.5)
    assert row.status == "inconsistent"
    assert row.n_nodes == 1
    assert (row.dim_n_px, row.dim_n_pxt) == (9, 0)
    assert row.error is None and row.cond is None
    assert "not polynomially consistent" in row.message
    assert not all_computed([row])


def test_ellipse_dash_rows() -> None:
    row = ellipse_row(7.0, 4, 5)
    assert row.status == "skipped"
    assert row.max_error is None and row.max_grad_error is None and row.cond is None
    assert all_computed([row])
    assert ellipse_row(5.0, 3, 5).status == "ok"


def test_ellipse_error_decreases_without_jitter() -> None:
    coarse = ellipse_row(5.0, 3, 10, jitter=0.0)
    fine = ellipse_row(5.0, 3, 20, jitter=0.0)
    assert fine.max_error < coarse.max_error
    assert fine.max_grad_error < coarse.max_grad_error


def test_ellipse_errors_match_published_orders() -> None:
    for seed in range(5):
        for (s, q), reference in ELLIPSE_REFERENCE.items():
            for n, (max_error, max_grad_error) in reference.items():
                row = ellipse_row(s, q, n, seed=seed)
                assert row.status == "ok"
                assert within_factor(row.max_error, max_error), (seed, s, q, n, row.max_error)
                assert within_factor(row.max_grad_error, max_grad_error), (seed, s, q, n, row.max_grad_error)
        assert ellipse_row(9.0, 5, 80, seed=seed).max_error <= 1e-7


def test_ellipse_errors_decrease_with_size() -> None:
    for seed in range(5):
        for s, q in ((5.0, 3), (7.0, 4)):
            config = ExperimentConfig(experiment="ellipse", pairs=[(s, q)], sizes=[10, 20, 40, 80, 160], seed=seed)
            errors = [row.max_error for row in run_ellipse_experiment(config)]
            assert all(later < earlier for earlier, later in zip(errors, errors[1:])), (seed, s, q, errors)


def test_ellipse_rows_keep_config_order() -> None:
    config = ExperimentConfig(experiment="ellipse", pairs=[(5, 3), (7, 4)], sizes=[10, 5], jobs=3)
    rows = run_ellipse_experiment(config)
    assert [(row.s, row.q, row.n_nodes) for row in rows] == [(5.0, 3, 10), (5.0, 3, 5), (7.0, 4, 10), (7.0, 4, 5)]
    assert [row.status for row in rows] == ["ok", "ok", "ok", "skipped"]


def test_node_export() -> None:
    rows = export_ellipse_nodes(ExperimentConfig(experiment="nodes", sizes=[5, 10]))
    assert len(rows) == 15
    assert [row.index for row in rows[:5]] == [0, 1, 2, 3, 4]
    for row in rows:
        assert row.x**2 + (row.y / 0.75) ** 2 == pytest.approx(1.0)


def test_csv_round_trip(tmp_path: Path) -> None:
    grid = [grid_row(2, 1.0), grid_row(2, SQRT2), grid_row(2, 0.5)]
    path = write_rows(grid, tmp_path / "grid.csv")
    assert read_rows(path, GridRow) == grid
    assert path.read_text().splitlines()[0] == "d,r,n_nodes,dim_n_px,dim_n_pxt,error,l1,cond,status,message"

    ellipse = [ellipse_row(5.0, 3, 10), ellipse_row(9.0, 5, 5)]
    assert read_rows(write_rows(ellipse, tmp_path / "ellipse.csv"), EllipseRow) == ellipse

    nodes = export_ellipse_nodes(ExperimentConfig(experiment="nodes", sizes=[5]))
    assert read_rows(write_rows(nodes, tmp_path / "nodes.csv"), NodeRow) == nodes
    with pytest.raises(ValueError):
        read_rows(tmp_path / "nodes.csv", GridRow)


def test_table_rendering(tmp_path: Path) -> None:
    rows = [grid_row(2, 1.0), grid_row(2, 2.0)]
    lines = render_table(rows).splitlines()
    assert lines[0].split() == ["d", "r", "|X|", "dN", "dNt", "E(w)", "|w|_1", "cond", "status"]
    assert lines[1].split()[:8] == ["2", "1", "5", "5", "0", "13.4", "8.0", "-"]
    assert lines[2].split()[5:7] == ["7.4", "11.8"]
    markdown = render_markdown(rows)
    assert markdown.startswith("| d | r | |X|")
    path = write_rows(rows, tmp_path / "table.md", "markdown")
    assert path.read_text() == markdown


def test_radius_formatting_and_parsing() -> None:
    assert format_radius(2.0) == "2"
    assert format_radius(math.sqrt(3.0)) == "sqrt3"
    assert format_radius(0.5) == "0.5"
    assert parse_radius("sqrt2") == pytest.approx(SQRT2)
    assert parse_radius("√3") == pytest.approx(math.sqrt(3.0))
    assert parse_radius("1.5") == 1.5
    assert parse_pair("7,4") == (7.0, 4)


def test_cli_grid(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    out = tmp_path / "table.csv"
    assert main(["--experiment", "grid", "--d", "2", "--r", "1", "--r", "sqrt2", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "13.4" in printed and "10.6" in printed
    rows = read_rows(out, GridRow)
    assert [row.n_nodes for row in rows] == [5, 9]


def test_cli_reports_failed_rows() -> None:
    assert main(["--experiment", "grid", "--d", "2", "--r", "0.5"]) == 1


def test_cli_ellipse_pairs(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["--experiment", "ellipse", "--s", "7", "--q", "4", "--n", "5", "--n", "10"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    assert lines[1].split()[-1] == "skipped"
    assert main(["--experiment", "ellipse", "--pairs", "5,3", "--n", "10", "--jobs", "2"]) == 0


def test_cli_nodes(tmp_path: Path) -> None:
    out = tmp_path / "nodes.csv"
    assert main(["--experiment", "nodes", "--seed", "2", "--out", str(out)]) == 0
    assert len(read_rows(out, NodeRow)) == 15


def test_cli_argument_errors() -> None:
    with pytest.raises(SystemExit) as excinfo:
        main(["--experiment", "ellipse", "--s", "7"])
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit) as excinfo:
        main(["--r", "minus"])
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit) as excinfo:
        main(["--experiment", "grid", "--s", "7", "--q", "2"])
    assert excinfo.value.code == 2
