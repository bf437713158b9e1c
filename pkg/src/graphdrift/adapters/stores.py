"""Tabular and array outputs of experiment runs."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from graphdrift.app.evaluation import ComparisonGrid, GridSolution
from graphdrift.app.fvm import FvTrajectory
from graphdrift.app.optim import IterationRecord
from graphdrift.domain.graph import build_graph
from graphdrift.ports.solution import Solution

FLOAT_FORMAT = "%.17g"


class StoreError(RuntimeError):
    """Raised when a stored result cannot be read back."""


def _write_frame(path: Path, frame: pd.DataFrame) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def trajectory_frame(trajectory: FvTrajectory) -> pd.DataFrame:
    """Rows ``(time, edge_or_vertex_id, cell_index, value)``; edges as ``e<id>``, vertex patches as ``v<id>``."""

    grid = trajectory.grid
    labels: list[str] = []
    cells: list[int] = []
    for edge in grid.graph.edges:
        count = grid.cells[edge.edge_id] - 1
        labels.extend([f"e{edge.edge_id}"] * count)
        cells.extend(range(1, count + 1))
    for vertex in grid.graph.vertices:
        labels.append(f"v{vertex.vertex_id}")
        cells.append(0)
    n_states = len(trajectory)
    n_unknowns = len(labels)
    return pd.DataFrame(
        {
            "time": np.repeat(trajectory.times, n_unknowns),
            "edge_or_vertex_id": np.tile(np.asarray(labels, dtype=object), n_states),
            "cell_index": np.tile(np.asarray(cells, dtype=np.int64), n_states),
            "value": trajectory.states.ravel(),
        }
    )


def write_trajectory_csv(path: Path, trajectory: FvTrajectory) -> Path:
    return _write_frame(path, trajectory_frame(trajectory))


def write_loss_history(path: Path, records: Iterable[IterationRecord]) -> Path:
    """``iteration, phase, loss, grad_norm, wall_clock, stage``; ``stage`` names the sweep element or time step."""

    rows = []
    for record in records:
        stage, _, phase = record.phase.rpartition(".")
        rows.append(
            {
                "iteration": record.iteration,
                "phase": phase,
                "loss": record.loss,
                "grad_norm": record.grad_norm,
                "wall_clock": record.wall_clock,
                "stage": stage,
            }
        )
    columns = ["iteration", "phase", "loss", "grad_norm", "wall_clock", "stage"]
    return _write_frame(path, pd.DataFrame.from_records(rows, columns=columns))


def snapshot_frame(solution: Solution, grid: ComparisonGrid, time: float) -> pd.DataFrame:
    blocks = []
    for edge in grid.graph.edges:
        xs = grid.xs(edge.edge_id)
        values = np.asarray(solution.evaluate(edge.edge_id, np.array([time]), xs))[0]
        blocks.append(pd.DataFrame({"edge_id": edge.edge_id, "x": xs, "value": values}))
    return pd.concat(blocks, ignore_index=True)


def snapshot_filename(time: float) -> str:
    return f"snapshot_t{time:g}.csv"


def write_snapshot_csv(path: Path, solution: Solution, grid: ComparisonGrid, time: float) -> Path:
    return _write_frame(path, snapshot_frame(solution, grid, time))


def write_json(path: Path, payload: Mapping[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def save_grid_solution(path: Path, solution: Solution, grid: ComparisonGrid) -> Path:
    """Sample ``solution`` on ``grid`` and store times, per-edge x grids and values with the edge list."""

    graph = grid.graph
    arrays: dict[str, np.ndarray] = {
        "times": grid.times,
        "horizon": np.array(grid.horizon),
        "label": np.array(solution.label()),
        "origins": np.array([str(graph.vertex(e.origin).name) for e in graph.edges]),
        "terminals": np.array([str(graph.vertex(e.terminal).name) for e in graph.edges]),
        "lengths": np.array([e.length for e in graph.edges]),
    }
    for edge, block in zip(graph.edges, grid.sample(solution)):
        arrays[f"x_{edge.edge_id}"] = grid.xs(edge.edge_id)
        arrays[f"values_{edge.edge_id}"] = block
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, **arrays)
    return path


def load_grid_solution(path: Path) -> GridSolution:
    path = Path(path)
    if not path.is_file():
        raise StoreError(f"store.missing: {path} does not exist")
    with np.load(path, allow_pickle=False) as archive:
        try:
            edges = [
                (str(o), str(t), float(length))
                for o, t, length in zip(archive["origins"], archive["terminals"], archive["lengths"])
            ]
            graph = build_graph(edges)
            xs = tuple(np.array(archive[f"x_{e}"]) for e in range(len(edges)))
            values = tuple(np.array(archive[f"values_{e}"]) for e in range(len(edges)))
            return GridSolution(
                graph=graph,
                horizon=float(archive["horizon"]),
                times=np.array(archive["times"]),
                xs=xs,
                values=values,
            )
        except KeyError as exc:
            raise StoreError(f"store.format: {path} lacks array {exc.args[0]}") from exc


def grid_of(solution: GridSolution) -> ComparisonGrid:
    """Comparison grid matching the samples stored in a grid solution."""

    return ComparisonGrid(solution.graph, solution.horizon, solution.times.size, solution.xs[0].size)


def sweep_tables(rows: Sequence[Mapping[str, Any]], value: str = "relative_error") -> pd.DataFrame:
    """Pivot sweep rows into a layers x widths table."""

    frame = pd.DataFrame.from_records(list(rows))
    return frame.pivot(index="layers", columns="width", values=value).sort_index().sort_index(axis=1)


def write_sweep_tables(directory: Path, rows: Sequence[Mapping[str, Any]]) -> tuple[Path, Path, Path]:
    directory.mkdir(parents=True, exist_ok=True)
    rows_path = _write_frame(directory / "sweep_rows.csv", pd.DataFrame.from_records(list(rows)))
    table = sweep_tables(rows)
    csv_path = directory / "sweep_table.csv"
    table.to_csv(csv_path, float_format=FLOAT_FORMAT, lineterminator="\n")
    md_path = directory / "sweep_table.md"
    md_path.write_text(table.to_markdown(floatfmt=".3g") + "\n", encoding="utf-8")
    return rows_path, csv_path, md_path


__all__ = [
    "FLOAT_FORMAT",
    "StoreError",
    "grid_of",
    "load_grid_solution",
    "save_grid_solution",
    "snapshot_filename",
    "snapshot_frame",
    "sweep_tables",
    "trajectory_frame",
    "write_json",
    "write_loss_history",
    "write_snapshot_csv",
    "write_sweep_tables",
    "write_trajectory_csv",
]
