"""Delimited exports: per-iteration metric rows and sampled trajectory files."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .iteration import IterationMetrics
from .landing import LandingModel
from .mdp import Trajectory

METRICS_HEADER = (
    "seed",
    "iteration",
    "method",
    "mu_or_k",
    "epsilon",
    "cosine_similarity",
    "wall_time_s",
)

TRAJECTORY_HEADER = (
    "trajectory",
    "step",
    "time_s",
    "h_ft",
    "h_dot_fps",
    "x_dot_fps",
    "vertical_accel_fps2",
    "horizontal_accel_fps2",
)


def metrics_rows(seed: int, history: list[IterationMetrics]) -> list[tuple]:
    rows = []
    for m in history:
        cosine = "" if m.cosine_similarity is None else repr(m.cosine_similarity)
        rows.append(
            (
                seed,
                m.iteration,
                m.method,
                repr(float(m.mu_or_k)),
                repr(float(m.epsilon)),
                cosine,
                repr(float(m.wall_time_s)),
            )
        )
    return rows


def write_metrics_csv(path: str | Path, rows: list[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER)
        writer.writerows(rows)


@dataclass(frozen=True)
class TrajectoryRow:
    trajectory: int
    step: int
    time_s: float
    h_ft: float
    h_dot_fps: float
    x_dot_fps: float
    vertical_accel_fps2: float
    horizontal_accel_fps2: float


def trajectory_rows(trajectories: list[Trajectory], model: LandingModel) -> list[TrajectoryRow]:
    """Decode index trajectories into physical per-step rows."""
    rows = []
    dt = model.time_step
    for tid, traj in enumerate(trajectories):
        for step, (s_idx, a_idx) in enumerate(zip(traj.states, traj.actions)):
            state = model.state_at(s_idx)
            action = model.action_at(a_idx)
            rows.append(
                TrajectoryRow(
                    trajectory=tid,
                    step=step,
                    time_s=step * dt,
                    h_ft=state.h,
                    h_dot_fps=state.h_dot,
                    x_dot_fps=state.x_dot,
                    vertical_accel_fps2=action.vertical_accel,
                    horizontal_accel_fps2=action.horizontal_accel,
                )
            )
    return rows


def write_trajectories_csv(path: str | Path, rows: list[TrajectoryRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_HEADER)
        for r in rows:
            writer.writerow(
                (
                    r.trajectory,
                    r.step,
                    repr(r.time_s),
                    repr(r.h_ft),
                    repr(r.h_dot_fps),
                    repr(r.x_dot_fps),
                    repr(r.vertical_accel_fps2),
                    repr(r.horizontal_accel_fps2),
                )
            )


def read_trajectories_csv(path: str | Path) -> list[TrajectoryRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRAJECTORY_HEADER:
            raise ValueError(f"unexpected trajectory CSV header: {header}")
        for rec in reader:
            rows.append(
                TrajectoryRow(
                    trajectory=int(rec[0]),
                    step=int(rec[1]),
                    time_s=float(rec[2]),
                    h_ft=float(rec[3]),
                    h_dot_fps=float(rec[4]),
                    x_dot_fps=float(rec[5]),
                    vertical_accel_fps2=float(rec[6]),
                    horizontal_accel_fps2=float(rec[7]),
                )
            )
    return rows
