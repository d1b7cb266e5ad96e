"""Trajectory CSV, summary JSON, SVG figures and the h2 zero-locus table."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, List, Sequence

import numpy as np

from .barrier import BarrierParams, Obstacle
from .scenario import OBSTACLE_FIELDS, RunSummary, TrajectoryRecord

STATE_COLUMNS = ("x_f", "y_f", "theta_f", "beta", "v_f", "u_betadot")
SVG_SIZE_PX = (800, 600)


def csv_header(n_obstacles: int) -> List[str]:
    cols = ["t", *STATE_COLUMNS, "v_N", "ubetadot_N", "v_cmd", "ubetadot_cmd"]
    for j in range(1, n_obstacles + 1):
        cols += [f"obs{j}_{name}" for name in OBSTACLE_FIELDS]
    return cols + ["qp_status", "kkt_residual"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(records: Sequence[TrajectoryRecord], n_obstacles: int, path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(csv_header(n_obstacles))
            for r in records:
                row = [_fmt(r.t), *(_fmt(v) for v in r.z), *(_fmt(v) for v in r.u_N),
                       *(_fmt(v) for v in r.u_cmd)]
                for o in r.obstacles:
                    row += [_fmt(getattr(o, name)) for name in OBSTACLE_FIELDS]
                row += [r.qp_status, _fmt(r.kkt_residual)]
                w.writerow(row)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _json_number(v):
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return None
    return v


def summary_dict(summary: RunSummary) -> dict:
    """Flat snake_case view; per-obstacle lists become ``<key>_obs<j>`` entries."""
    out = {}
    for key, value in asdict(summary).items():
        if isinstance(value, list):
            for j, v in enumerate(value, start=1):
                out[f"{key}_obs{j}"] = _json_number(float(v))
        elif isinstance(value, float):
            out[key] = _json_number(value)
        else:
            out[key] = value
    out["n_obstacles"] = len(summary.min_h2)
    return out


def write_summary_json(summary: RunSummary, path) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(summary_dict(summary), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


# --- figures -------------------------------------------------------------------

def _figure():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    plt.rcParams["svg.fonttype"] = "path"
    plt.rcParams["svg.hashsalt"] = "afs-pacbf"
    return plt


def _save(fig, path, description=None):
    meta = {"Date": None, "Creator": "afs_pacbf"}
    if description is not None:
        meta["Description"] = description
    try:
        fig.savefig(path, format="svg", metadata=meta)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    finally:
        import matplotlib.pyplot as plt

        plt.close(fig)


def _new_fig(plt, nrows=1):
    w, h = SVG_SIZE_PX
    fig, axes = plt.subplots(nrows, 1, figsize=(w / 72.0, h / 72.0), dpi=72, squeeze=False)
    return fig, axes[:, 0]


def _column(records, j, name):
    return np.array([getattr(r.obstacles[j], name) for r in records], dtype=float)


def plot_path(records, obstacles, bp, goal, path, nominal_records=None):
    plt = _figure()
    fig, (ax,) = _new_fig(plt)
    th = np.linspace(0, 2 * np.pi, 200)
    for j, o in enumerate(obstacles, start=1):
        ax.fill(o.x_o + o.R_o * np.cos(th), o.y_o + o.R_o * np.sin(th), color="0.6", alpha=0.6,
                gid=f"obstacle{j}")
        # h2 = 0 boundary for a vehicle heading straight at the obstacle center (widest extent)
        r0 = math.sqrt(bp.d_min ** 2 + (o.R_o + bp.r_s) ** 2)
        ax.plot(o.x_o + r0 * np.cos(th), o.y_o + r0 * np.sin(th), "r:", lw=0.8)
        r90 = math.sqrt(bp.d_min ** 2 + o.R_o ** 2)
        ax.plot(o.x_o + r90 * np.cos(th), o.y_o + r90 * np.sin(th), "r--", lw=0.8)
    if nominal_records:
        ax.plot([r.z[0] for r in nominal_records], [r.z[1] for r in nominal_records], "k--",
                lw=1, label="nominal (no filter)")
    if records:
        ax.plot([r.z[0] for r in records], [r.z[1] for r in records], "b-", lw=1.5,
                label="filtered", gid="path")
        ax.plot(records[0].z[0], records[0].z[1], "go")
    ax.plot(goal[0], goal[1], "r*", ms=12)
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.grid(True, alpha=0.3)
    if records or nominal_records:
        ax.legend(loc="upper left")
    _save(fig, path)


def plot_controls(records, path):
    plt = _figure()
    fig, (a1, a2) = _new_fig(plt, 2)
    t = [r.t for r in records]
    for ax, k, unit in ((a1, 0, "v (m/s)"), (a2, 1, "beta rate (rad/s)")):
        ax.plot(t, [r.u_N[k] for r in records], "k:", label="nominal")
        ax.plot(t, [r.u_cmd[k] for r in records], "r-", label="command")
        ax.plot(t, [r.z[4 + k] for r in records], "b-", label="actual")
        ax.set_ylabel(unit)
        ax.grid(True, alpha=0.3)
    a1.legend(loc="best")
    a2.set_xlabel("t (s)")
    _save(fig, path)


def plot_penalties(records, n_obstacles, path):
    plt = _figure()
    fig, axes = _new_fig(plt, 3)
    t = [r.t for r in records]
    for ax, name in zip(axes, ("p1", "p2", "nu1")):
        for j in range(n_obstacles):
            ax.plot(t, _column(records, j, name), label=f"obs{j + 1}")
        ax.set_ylabel(name)
        ax.grid(True, alpha=0.3)
    axes[0].legend(loc="best")
    axes[-1].set_xlabel("t (s)")
    _save(fig, path)


def plot_psi(records, n_obstacles, summary: RunSummary, path):
    """psi0/psi1/psi2 per obstacle with a marker at each minimum.

    The marker values are embedded as JSON in the SVG description metadata.
    """
    plt = _figure()
    fig, axes = _new_fig(plt, 3)
    t = np.array([r.t for r in records])
    mins = {}
    for ax, name, key in zip(axes, ("h2", "psi1", "psi2"), ("psi0", "psi1", "psi2")):
        for j in range(n_obstacles):
            y = _column(records, j, name)
            ax.plot(t, y, label=f"obs{j + 1}", gid=f"{key}_obs{j + 1}")
            ok = ~np.isnan(y)
            if ok.any():
                i = int(np.nanargmin(y))
                ax.plot(t[i], y[i], "kv", gid=f"min_{key}_obs{j + 1}")
                mins[f"min_{key}_obs{j + 1}"] = float(y[i])
        ax.axhline(0.0, color="k", lw=0.5)
        ax.set_ylabel(key)
        ax.grid(True, alpha=0.3)
    axes[-1].set_xlabel("t (s)")
    if n_obstacles and records:
        axes[0].legend(loc="best")
    _save(fig, path, description=json.dumps(mins, sort_keys=True))


def emit_outputs(records, summary, out_dir, formats=("csv", "json", "svg"), obstacles=(),
                 bp: BarrierParams = None, goal=(9.0, 9.0), nominal_records=None) -> List[Path]:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    n = len(summary.min_h2) if summary.min_h2 else len(obstacles)
    written = []
    formats = set(formats)
    unknown = formats - {"csv", "json", "svg"}
    if unknown:
        raise ValueError(f"unknown output formats: {sorted(unknown)}")
    if "csv" in formats:
        written.append(write_trajectory_csv(records, n, out / "trajectory.csv"))
    if "json" in formats:
        written.append(write_summary_json(summary, out / "summary.json"))
    if "svg" in formats:
        bp = bp or BarrierParams()
        plot_path(records, obstacles, bp, goal, out / "path.svg", nominal_records)
        plot_controls(records, out / "controls.svg")
        plot_penalties(records, n, out / "penalties.svg")
        plot_psi(records, n, summary, out / "psi.svg")
        written += [out / f for f in ("path.svg", "controls.svg", "penalties.svg", "psi.svg")]
    return written


# --- zero locus ----------------------------------------------------------------

LOCUS_COLUMNS = ("eta", "d_h2", "x_h2", "y_h2", "d_h1", "x_h1", "y_h1")


def locus(bp: BarrierParams, obstacle: Obstacle, heading: float, samples: int) -> np.ndarray:
    """Boundary distances of ``h2 = 0`` and ``h1 = 0`` over eta in [-pi/2, pi/2].

    Row layout follows :data:`LOCUS_COLUMNS`; points are front-axle positions
    of a vehicle with the given heading sitting on each boundary.
    """
    if samples < 3:
        raise ValueError("samples must be >= 3")
    eta = np.linspace(-0.5 * np.pi, 0.5 * np.pi, samples)
    r = obstacle.R_o + bp.r_s * np.cos(eta)
    d2 = np.sqrt(bp.d_min ** 2 + r ** 2)
    d1 = r
    bearing = heading + eta  # direction from vehicle to obstacle center
    ux, uy = np.cos(bearing), np.sin(bearing)
    return np.column_stack([
        eta, d2, obstacle.x_o - d2 * ux, obstacle.y_o - d2 * uy,
        d1, obstacle.x_o - d1 * ux, obstacle.y_o - d1 * uy,
    ])


def write_locus_csv(table: np.ndarray, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOCUS_COLUMNS)
        for row in table:
            w.writerow([_fmt(v) for v in row])
    return path
