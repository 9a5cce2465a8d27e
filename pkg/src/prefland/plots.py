"""Figure rendering for the CLI report paths (written next to the CSVs)."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .exports import TrajectoryRow


def convergence_figure(rows: list[tuple], path: str | Path) -> None:
    """Mean cosine similarity vs. query count, one curve per sweep group.

    ``rows`` are metric tuples in the metrics-CSV column order; trials of the
    same (method, mu_or_k, epsilon) group are averaged.
    """
    groups: dict[tuple, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for seed, iteration, method, mu_or_k, epsilon, cosine, _wall in rows:
        if cosine == "" or cosine is None:
            continue
        key = (method, float(mu_or_k), float(epsilon))
        groups[key][int(iteration)].append(float(cosine))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for key in sorted(groups):
        method, mu_or_k, epsilon = key
        iters = sorted(groups[key])
        means = [float(np.mean(groups[key][i])) for i in iters]
        label = f"{method} ({'mu' if method == 'multiobjective' else 'k'}={mu_or_k:g}"
        label += f", eps={epsilon:g})" if epsilon else ")"
        ax.plot(iters, means, label=label)
    ax.set_xlabel("Number of queries")
    ax.set_ylabel("Cosine similarity")
    ax.set_ylim(0.0, 1.02)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8, loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def trajectory_figure(rows: list[TrajectoryRow], path: str | Path) -> None:
    """Four-panel profile plot of exported trajectories."""
    by_traj: dict[int, list[TrajectoryRow]] = defaultdict(list)
    for r in rows:
        by_traj[r.trajectory].append(r)
    fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    for tid in sorted(by_traj):
        steps = sorted(by_traj[tid], key=lambda r: r.step)
        t = [r.time_s for r in steps]
        h = [r.h_ft for r in steps]
        hd = [r.h_dot_fps for r in steps]
        xd = [r.x_dot_fps for r in steps]
        dist = np.concatenate(
            ([0.0], np.cumsum([r.x_dot_fps for r in steps[:-1]]))
        ) * (t[1] - t[0] if len(t) > 1 else 1.0)
        axes[0, 0].plot(t, h, alpha=0.6, lw=1)
        axes[0, 1].plot(t, xd, alpha=0.6, lw=1)
        axes[1, 0].plot(t, hd, alpha=0.6, lw=1)
        axes[1, 1].plot(dist, h, alpha=0.6, lw=1)
    axes[0, 0].set_xlabel("time (s)")
    axes[0, 0].set_ylabel("altitude (ft)")
    axes[0, 1].set_xlabel("time (s)")
    axes[0, 1].set_ylabel("ground speed (ft/s)")
    axes[1, 0].set_xlabel("time (s)")
    axes[1, 0].set_ylabel("vertical rate (ft/s)")
    axes[1, 1].set_xlabel("ground distance (ft)")
    axes[1, 1].set_ylabel("altitude (ft)")
    for ax in axes.flat:
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
