"""Seeded experiment sessions and sweep batches over the simulated expert."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import ExperimentConfig
from .iteration import SessionState, SimulatedExpert, drive_with_expert, reward_iteration
from .session import SessionFileWriter, resume_session


@dataclass(frozen=True)
class SessionResult:
    """Plain-data summary of one session, cheap to pickle across workers."""

    seed: int
    method: str
    mu_or_k: float
    epsilon: float
    cosines: tuple[float, ...]
    posterior_stds: tuple[tuple[float, float, float], ...]
    estimates: tuple[tuple[float, float, float], ...]
    wall_times: tuple[float, ...]
    final_estimate: tuple[float, float, float]

    def metric_rows(self) -> list[tuple]:
        rows = []
        for i, cosine in enumerate(self.cosines, start=1):
            rows.append(
                (
                    self.seed,
                    i,
                    self.method,
                    repr(float(self.mu_or_k)),
                    repr(float(self.epsilon)),
                    repr(float(cosine)),
                    repr(float(self.wall_times[i - 1])),
                )
            )
        return rows


def _result_from_state(config: ExperimentConfig, state: SessionState) -> SessionResult:
    return SessionResult(
        seed=config.seed,
        method=config.method,
        mu_or_k=config.mu if config.method == "multiobjective" else config.k,
        epsilon=config.epsilon,
        cosines=tuple(m.cosine_similarity for m in state.history),
        posterior_stds=tuple(m.posterior_std for m in state.history),
        estimates=tuple(m.estimate for m in state.history),
        wall_times=tuple(m.wall_time_s for m in state.history),
        final_estimate=tuple(state.estimate.as_array()),
    )


def run_session(config: ExperimentConfig, session_path: str | Path | None = None) -> SessionResult:
    """Run one simulated-expert session to completion."""
    expert = SimulatedExpert(config.require_w_true(), config.epsilon)
    writer = SessionFileWriter(session_path, config) if session_path else None
    state = reward_iteration(config, expert, writer=writer)
    return _result_from_state(config, state)


def finish_session(session_path: str | Path) -> SessionResult:
    """Resume an interrupted simulated session and run it to max_iter."""
    engine = resume_session(session_path)
    expert = SimulatedExpert(engine.config.require_w_true(), engine.config.epsilon)
    drive_with_expert(engine, expert)
    return _result_from_state(engine.config, engine.state())


def _run_task(task: tuple[ExperimentConfig, str | None]) -> SessionResult:
    config, path = task
    return run_session(config, path)


def run_batch(
    tasks: list[tuple[ExperimentConfig, str | None]],
    workers: int | None = None,
) -> list[SessionResult]:
    """Run independent sessions, in parallel when more than one worker makes
    sense. Results keep task order; identical seeds give identical results
    regardless of scheduling."""
    if workers is None:
        workers = min(len(tasks), os.cpu_count() or 1)
    if workers <= 1 or len(tasks) <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks))
