"""Session files: a JSON-lines header/body/footer format.

Line 1 is a header carrying the config and format version; each answered
query appends one record line (trajectories, response, metrics); the final
line summarizes the latest posterior. Every update rewrites the file through
a temp-file rename, so a killed process always leaves a loadable file with a
whole number of completed iterations.
"""
from __future__ import annotations

import dataclasses
import json
import os
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .iteration import IterationMetrics, SessionEngine
from .landing import LandingModel, RewardWeights, TrajectorySet
from .mdp import Trajectory
from .preferences import PosteriorSamples, PreferenceRecord

FORMAT_VERSION = 1


class SessionFileError(ValueError):
    """The session file is malformed or inconsistent."""


def _trajectory_to_json(traj: Trajectory) -> dict:
    return {
        "states": list(traj.states),
        "actions": list(traj.actions),
        "landed": traj.landed,
    }


def _trajectory_from_json(obj: dict) -> Trajectory:
    return Trajectory(
        states=tuple(int(s) for s in obj["states"]),
        actions=tuple(int(a) for a in obj["actions"]),
        landed=bool(obj["landed"]),
    )


def _set_to_json(tau: TrajectorySet) -> list[dict]:
    return [_trajectory_to_json(t) for t in tau.trajectories]


def _set_from_json(items: list[dict]) -> TrajectorySet:
    return TrajectorySet(tuple(_trajectory_from_json(t) for t in items))


def _metrics_to_json(metrics: IterationMetrics) -> dict:
    return dataclasses.asdict(metrics)


def _metrics_from_json(obj: dict) -> IterationMetrics:
    fields = dict(obj)
    for name in ("pair_first", "pair_second", "estimate", "posterior_std"):
        fields[name] = tuple(float(v) for v in fields[name])
    return IterationMetrics(**fields)


class SessionFileWriter:
    """Owns one session file; staged records flush atomically per iteration."""

    def __init__(self, path: str | Path, config: ExperimentConfig, resume: bool = False):
        self.path = Path(path)
        self._record_lines: list[str] = []
        self._footer: str | None = None
        header = {
            "kind": "header",
            "format_version": FORMAT_VERSION,
            "config": config.to_mapping(),
        }
        self._header = json.dumps(header)
        if resume and self.path.exists():
            loaded = load_session(self.path)
            stored = json.dumps(
                {"kind": "header", "format_version": FORMAT_VERSION,
                 "config": loaded.config.to_mapping()}
            )
            if stored != self._header:
                raise SessionFileError("session file config does not match")
            self._record_lines = loaded.record_lines
            self._footer = loaded.footer_line
        else:
            self._flush()

    def on_record(self, record: PreferenceRecord, metrics: IterationMetrics) -> None:
        line = {
            "kind": "record",
            "iteration": metrics.iteration,
            "response": record.response,
            "tau_a": _set_to_json(record.tau_a),
            "tau_b": _set_to_json(record.tau_b),
            "metrics": _metrics_to_json(metrics),
        }
        self._record_lines.append(json.dumps(line))

    def on_posterior(self, iteration: int, samples: PosteriorSamples,
                     estimate: RewardWeights) -> None:
        footer = {
            "kind": "posterior",
            "iteration": iteration,
            "mean": samples.samples.mean(axis=0).tolist(),
            "std": samples.samples.std(axis=0, ddof=1).tolist(),
            "estimate": estimate.as_array().tolist(),
            "acceptance_rate": samples.acceptance_rate,
        }
        self._footer = json.dumps(footer)
        self._flush()

    def _flush(self) -> None:
        lines = [self._header, *self._record_lines]
        if self._footer is not None:
            lines.append(self._footer)
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        tmp.write_text("\n".join(lines) + "\n")
        os.replace(tmp, self.path)


@dataclasses.dataclass
class LoadedSession:
    config: ExperimentConfig
    records: list[PreferenceRecord]
    history: list[IterationMetrics]
    footer: dict | None
    record_lines: list[str]
    footer_line: str | None


def load_session(path: str | Path) -> LoadedSession:
    """Parse a session file back into records, metrics, and config."""
    raw_lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not raw_lines:
        raise SessionFileError(f"{path}: empty session file")
    header = json.loads(raw_lines[0])
    if header.get("kind") != "header":
        raise SessionFileError(f"{path}: first line is not a session header")
    if header.get("format_version") != FORMAT_VERSION:
        raise SessionFileError(f"{path}: unsupported format version")
    config = ExperimentConfig.from_mapping(header["config"])
    records: list[PreferenceRecord] = []
    history: list[IterationMetrics] = []
    record_lines: list[str] = []
    footer = None
    footer_line = None
    for line in raw_lines[1:]:
        obj = json.loads(line)
        kind = obj.get("kind")
        if kind == "record":
            records.append(
                PreferenceRecord(
                    tau_a=_set_from_json(obj["tau_a"]),
                    tau_b=_set_from_json(obj["tau_b"]),
                    response=int(obj["response"]),
                )
            )
            history.append(_metrics_from_json(obj["metrics"]))
            record_lines.append(line)
        elif kind == "posterior":
            footer = obj
            footer_line = line
        else:
            raise SessionFileError(f"{path}: unknown line kind {kind!r}")
    if len(records) != len(history):
        raise SessionFileError(f"{path}: record/metric count mismatch")
    if footer is not None and footer.get("iteration") != len(records):
        raise SessionFileError(f"{path}: footer iteration does not match body")
    return LoadedSession(config, records, history, footer, record_lines, footer_line)


def resume_session(path: str | Path, model: LandingModel | None = None) -> SessionEngine:
    """Rebuild a live engine from a session file.

    The engine's posterior is regenerated by re-running the last MCMC update
    with its original seed, so the resumed session continues exactly as the
    uninterrupted one would have.
    """
    loaded = load_session(path)
    writer = SessionFileWriter(path, loaded.config, resume=True)
    engine = SessionEngine(loaded.config, model=model, writer=writer)
    engine.restore(loaded.records, loaded.history)
    if loaded.footer is not None:
        stored = np.asarray(loaded.footer["estimate"])
        if not np.allclose(stored, engine.estimate.as_array(), atol=1e-9):
            raise SessionFileError(
                f"{path}: stored posterior estimate does not match the "
                "regenerated chain; file may be corrupt or from other settings"
            )
    return engine
