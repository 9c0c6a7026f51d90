"""Run-directory layout, state persistence and CSV exports.

Layout::

    <run>/config.snapshot          canonical YAML of the validated configuration
    <run>/history/iter_NNNN.state  JSON RunState, one per loop pass
    <run>/exports/front.csv        x_1..x_d, mu_1..mu_m of the denoised Pareto designs
    <run>/exports/denoised.csv     x_1..x_d, y_1..y_m, mu_1..mu_m for every observation
    <run>/exports/attainment.csv   y1, y2, value (long form, row-major cells)
    <run>/exports/deviation.csv    y1, y2, value
    <run>/exports/vorobev.csv      y1, y2 vertices of the Vorob'ev boundary
    <run>/exports/trace.csv        iteration, n, eeihv, accepted, stop_reason, x_*, y_*

Objective values are in the maximization convention. Floats are written with
``repr`` so every value parses back bit-exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .loop import RunState, report

HISTORY = "history"
EXPORTS = "exports"
SNAPSHOT = "config.snapshot"


class RunDirectoryError(FileNotFoundError):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path: Path) -> tuple[list, list]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def state_path(run_dir, iteration: int) -> Path:
    return Path(run_dir) / HISTORY / f"iter_{iteration:04d}.state"


def save_state(run_dir, state: RunState) -> Path:
    path = state_path(run_dir, state.iteration)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(state.to_dict(), allow_nan=False), encoding="utf-8")
    return path


def load_state(path) -> RunState:
    return RunState.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_history(run_dir) -> list:
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise RunDirectoryError(f"run directory not found: {run_dir}")
    files = sorted((run_dir / HISTORY).glob("iter_*.state"))
    if not files:
        raise RunDirectoryError(f"run directory has no saved states: {run_dir}")
    return [load_state(p) for p in files]


def export_run(run_dir, history) -> Path:
    """Write every CSV export for ``history`` into ``<run_dir>/exports``."""
    out = Path(run_dir) / EXPORTS
    out.mkdir(parents=True, exist_ok=True)
    final = history[-1]
    d = final.x.shape[1]
    m = final.y.shape[1]
    xs = [f"x_{i + 1}" for i in range(d)]
    ys = [f"y_{i + 1}" for i in range(m)]
    mus = [f"mu_{i + 1}" for i in range(m)]

    bundle = report(final)
    write_csv(out / "front.csv", xs + mus, bundle.front.tolist())
    write_csv(out / "denoised.csv", xs + ys + mus, np.hstack([final.x, final.y, final.denoised]).tolist())

    latest = next((s for s in reversed(history) if s.has_attainment), None)
    grid_header = ["y1", "y2", "value"]
    if latest is not None:
        grids = report(latest)
        write_csv(out / "attainment.csv", grid_header, grids.attainment.tolist())
        write_csv(out / "deviation.csv", grid_header, grids.deviation.tolist())
        write_csv(out / "vorobev.csv", ["y1", "y2"], grids.vorobev_boundary.tolist())
    else:
        for name in ("attainment.csv", "deviation.csv"):
            write_csv(out / name, grid_header, [])
        write_csv(out / "vorobev.csv", ["y1", "y2"], [])

    trace = []
    for s in history:
        x_cells = list(s.next_x) if s.next_x is not None else [None] * d
        y_cells = list(s.next_y) if s.next_y is not None else [None] * m
        trace.append([s.iteration, s.n, s.next_value, s.accepted, s.stop_reason] + x_cells + y_cells)
    write_csv(out / "trace.csv", ["iteration", "n", "eeihv", "accepted", "stop_reason"] + xs + ys, trace)
    return out
