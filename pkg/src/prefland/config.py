"""Experiment configuration: defaults, validation, and flat key-value files.

Config files are plain text, one ``key = value`` pair per line with ``#``
comments. CLI flags override file values. Grid overrides replace the default
grid values but must keep the fixed grid sizes.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .landing import GridConfig, RewardWeights

METHODS = ("multiobjective", "probabilistic_qeval")
_METHOD_ALIASES = {"qeval": "probabilistic_qeval"}

_GRID_FIELDS = (
    "h_values",
    "h_dot_values",
    "x_dot_values",
    "vertical_accel_values",
    "horizontal_accel_values",
)


class ConfigError(ValueError):
    """A configuration value is missing, malformed, or out of range."""


@dataclass(frozen=True)
class ExperimentConfig:
    method: str = "multiobjective"
    mu: float = 500.0
    k: int = 10
    sample_count: int = 1000
    max_iter: int = 80
    epsilon: float = 0.0
    seed: int = 0
    w_true: tuple[float, float, float] | None = None
    rollouts_per_query: int = 10
    max_steps: int = 600
    time_step: float = 1.0
    discount: float = 0.99
    vi_tolerance: float = 1e-4
    precision: float = 1.0
    h_values: tuple[float, ...] | None = None
    h_dot_values: tuple[float, ...] | None = None
    x_dot_values: tuple[float, ...] | None = None
    vertical_accel_values: tuple[float, ...] | None = None
    horizontal_accel_values: tuple[float, ...] | None = None

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.mu < 0:
            raise ConfigError("mu must be non-negative")
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.sample_count < 100:
            raise ConfigError("sample_count must be at least 100")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")
        if not 0.0 <= self.epsilon < 1.0:
            raise ConfigError("epsilon must lie in [0, 1)")
        if self.rollouts_per_query < 1:
            raise ConfigError("rollouts_per_query must be at least 1")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")
        if self.time_step <= 0:
            raise ConfigError("time_step must be positive")
        if not 0.0 < self.discount < 1.0:
            raise ConfigError("discount must lie strictly inside (0, 1)")
        if self.vi_tolerance <= 0:
            raise ConfigError("vi_tolerance must be positive")
        if self.precision < 0:
            raise ConfigError("precision must be non-negative")
        if self.w_true is not None:
            try:
                RewardWeights.from_array(self.w_true)
            except ValueError as exc:
                raise ConfigError(f"w_true is not on the simplex: {exc}") from exc
        self.grid_config()

    def require_w_true(self) -> RewardWeights:
        if self.w_true is None:
            raise ConfigError("simulated-expert mode requires w_true")
        return RewardWeights.from_array(self.w_true)

    def require_live(self) -> None:
        if self.w_true is not None:
            raise ConfigError("live elicitation must not set w_true")

    def grid_config(self) -> GridConfig:
        overrides = {
            name: tuple(getattr(self, name))
            for name in _GRID_FIELDS
            if getattr(self, name) is not None
        }
        try:
            return GridConfig(**overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_mapping(self) -> dict:
        out = dataclasses.asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        kwargs = {}
        for f in dataclasses.fields(cls):
            if f.name not in mapping or mapping[f.name] is None:
                continue
            value = mapping[f.name]
            kwargs[f.name] = _coerce(f.name, value)
        return cls(**kwargs)


def _coerce(name: str, value):
    """Convert a raw string or JSON value into the field's natural type."""
    if name == "method":
        text = str(value).strip()
        return _METHOD_ALIASES.get(text, text)
    if name == "w_true" or name in _GRID_FIELDS:
        if isinstance(value, str):
            parts = [p for p in value.replace(",", " ").split() if p]
            value = [float(p) for p in parts]
        return tuple(float(v) for v in value)
    if name in ("k", "sample_count", "max_iter", "seed", "rollouts_per_query", "max_steps"):
        return int(value)
    return float(value)


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Read a flat ``key = value`` file into a string mapping."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value")
        entries[key] = value
    return entries


def load_config(path: str | Path | None = None, **overrides) -> ExperimentConfig:
    """Build a config from an optional file plus keyword overrides."""
    mapping: dict = {}
    if path is not None:
        raw = parse_config_file(path)
        known = {f.name for f in dataclasses.fields(ExperimentConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        mapping.update(raw)
    mapping.update({k: v for k, v in overrides.items() if v is not None})
    config = ExperimentConfig.from_mapping(mapping)
    config.validate()
    return config
