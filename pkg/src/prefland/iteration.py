"""The reward-learning loop: select a query, solve and roll out both policies,
obtain a preference, update the posterior, and track convergence metrics.

One SessionEngine instance owns one elicitation session. The loop is driven
either by a SimulatedExpert (batch experiments) or externally one response at
a time (the live HTTP service).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .config import ExperimentConfig
from .landing import LandingModel, LandingState, RewardWeights, TrajectorySet, cached_model
from .mdp import Trajectory, greedy_policy, rollout, softmax_policy
from .preferences import (
    CENTROID,
    PosteriorSamples,
    PreferenceRecord,
    adaptive_metropolis,
    estimate_weights,
    sample_uniform_simplex,
)
from .queries import QueryPair, select_query

# sub-stream ids for per-iteration seed derivation
_STREAM_PRIOR = 0
_STREAM_INIT_STATES = 1
_STREAM_EXPERT = 2
_STREAM_MCMC = 3
_STREAM_MODEL = 4


class QueryGenerationError(RuntimeError):
    """A rollout failed to land, so the query cannot be presented."""


class SessionComplete(RuntimeError):
    """Raised when a query is requested after max_iter responses."""


@dataclass(frozen=True)
class QueryBundle:
    """One query: both policies rolled out from a shared initial-state list."""

    pair: QueryPair
    rollouts_a: TrajectorySet
    rollouts_b: TrajectorySet
    initial_states: tuple[LandingState, ...]
    iteration: int

    def __post_init__(self):
        n = len(self.initial_states)
        if len(self.rollouts_a) != n or len(self.rollouts_b) != n:
            raise ValueError("each policy needs exactly one rollout per initial state")
        if not (self.rollouts_a.all_landed and self.rollouts_b.all_landed):
            raise ValueError("query bundles must contain only landed rollouts")


@dataclass
class SimulatedExpert:
    """Answers queries from a hidden true weight vector, erring with
    probability ``error_rate``."""

    w_true: RewardWeights
    error_rate: float = 0.0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)

    def __post_init__(self):
        if not 0.0 <= self.error_rate < 1.0:
            raise ValueError("error_rate must lie in [0, 1)")


@dataclass(frozen=True)
class IterationMetrics:
    """Per-iteration session metrics; cosine_similarity is None in live mode."""

    iteration: int
    method: str
    mu_or_k: float
    epsilon: float
    cosine_similarity: float | None
    acceptance_rate: float
    pair_first: tuple[float, float, float]
    pair_second: tuple[float, float, float]
    estimate: tuple[float, float, float]
    posterior_std: tuple[float, float, float]
    wall_time_s: float


@dataclass
class SessionState:
    """Everything accumulated by a session: inputs, posterior, and history."""

    records: list[PreferenceRecord]
    samples: PosteriorSamples
    history: list[IterationMetrics]
    estimate: RewardWeights


class SessionWriter(Protocol):
    def on_record(self, record: PreferenceRecord, metrics: IterationMetrics) -> None: ...

    def on_posterior(self, iteration: int, samples: PosteriorSamples,
                     estimate: RewardWeights) -> None: ...


def sample_initial_states(
    count: int, rng: np.random.Generator, model: LandingModel
) -> list[LandingState]:
    """Uniform draws from the approach band.

    Altitude comes from the top 20% of the grid, vertical rate from the two
    middle grid values (-8 and 0 ft/s on the default grid), ground speed from
    the middle third of its grid, and the previous action is the
    zero-acceleration command.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    grids = model.grids
    n_h = len(grids.h_values)
    n_xd = len(grids.x_dot_values)
    h_idx = rng.integers(n_h - n_h // 5, n_h, size=count)
    hd_idx = rng.integers(1, 3, size=count)
    xd_idx = rng.integers(n_xd // 3, 2 * (n_xd // 3), size=count)
    zero_a = model.zero_action_index
    return [
        LandingState(
            h=grids.h_values[h],
            h_dot=grids.h_dot_values[hd],
            x_dot=grids.x_dot_values[xd],
            a_prev=zero_a,
        )
        for h, hd, xd in zip(h_idx, hd_idx, xd_idx)
    ]


def _greedy_rollouts(
    weights: RewardWeights,
    initial_states: list[LandingState],
    model: LandingModel,
    tolerance: float,
    max_steps: int,
) -> TrajectorySet:
    q = model.solve(weights, tolerance)
    policy = greedy_policy(q)
    rollouts = []
    for state in initial_states:
        traj = rollout(model.mdp, policy, model.state_index(state), max_steps)
        if not traj.landed:
            raise QueryGenerationError(
                f"greedy rollout from {state} failed to land within {max_steps} "
                f"steps for weights {weights.as_array().tolist()}"
            )
        rollouts.append(traj)
    return TrajectorySet(tuple(rollouts))


def generate_query(
    pair: QueryPair,
    initial_states: list[LandingState],
    model: LandingModel,
    iteration: int = 0,
    tolerance: float = 1e-4,
    max_steps: int = 600,
) -> QueryBundle:
    """Solve the MDP for both weight vectors and roll out the greedy policies
    from every initial state. Query policies are deterministic, so the bundle
    is a pure function of its inputs."""
    return QueryBundle(
        pair=pair,
        rollouts_a=_greedy_rollouts(pair.w_first, initial_states, model, tolerance, max_steps),
        rollouts_b=_greedy_rollouts(pair.w_second, initial_states, model, tolerance, max_steps),
        initial_states=tuple(initial_states),
        iteration=iteration,
    )


def simulated_response(
    expert: SimulatedExpert, bundle: QueryBundle, model: LandingModel
) -> PreferenceRecord:
    """Answer a query from the hidden weights; exact reward ties answer +1 and
    are never flipped. Otherwise the response is wrong with probability
    ``error_rate``."""
    r_a = model.trajectory_set_reward(bundle.rollouts_a, expert.w_true)
    r_b = model.trajectory_set_reward(bundle.rollouts_b, expert.w_true)
    if r_a == r_b:
        response = 1
    else:
        response = 1 if r_a > r_b else -1
        if expert.error_rate > 0.0 and expert.rng.random() < expert.error_rate:
            response = -response
    return PreferenceRecord(bundle.rollouts_a, bundle.rollouts_b, response)


def cosine_similarity(
    samples: PosteriorSamples | np.ndarray, w_true: RewardWeights | np.ndarray
) -> float:
    """Mean cosine of the angle between each sample and the true weights."""
    rows = samples.samples if isinstance(samples, PosteriorSamples) else np.asarray(samples, float)
    rows = np.atleast_2d(rows)
    target = w_true.as_array() if isinstance(w_true, RewardWeights) else np.asarray(w_true, float)
    dots = rows @ target
    norms = np.linalg.norm(rows, axis=1) * np.linalg.norm(target)
    return float(np.mean(dots / norms))


class SessionEngine:
    """Drives one session of the reward-iteration loop.

    ``current_query`` lazily selects and generates the next query;
    ``submit`` folds one response into the posterior. All randomness is
    derived from the config seed and the iteration number, so a session can
    be suspended, resumed, and replayed bit-identically.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        model: LandingModel | None = None,
        writer: SessionWriter | None = None,
    ):
        config.validate()
        self.config = config
        self.model = model if model is not None else cached_model(
            config.grid_config(), time_step=config.time_step, discount=config.discount
        )
        self.writer = writer
        self.records: list[PreferenceRecord] = []
        self.history: list[IterationMetrics] = []
        self.samples = sample_uniform_simplex(
            config.sample_count, self._rng(0, _STREAM_PRIOR)
        )
        self._estimate: RewardWeights | None = None
        self._completed = 0
        self._pending: tuple[QueryBundle, float] | None = None

    def _rng(self, iteration: int, stream: int) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.config.seed, spawn_key=(iteration, stream))
        return np.random.default_rng(seq)

    @property
    def iteration(self) -> int:
        """Number of completed (answered) iterations."""
        return self._completed

    @property
    def done(self) -> bool:
        return self._completed >= self.config.max_iter

    @property
    def estimate(self) -> RewardWeights:
        return self._estimate if self._estimate is not None else estimate_weights(self.samples)

    def current_query(self) -> QueryBundle:
        if self.done:
            raise SessionComplete(f"session finished after {self._completed} queries")
        if self._pending is None:
            n = self._completed + 1
            start = time.perf_counter()
            pair = select_query(
                self.samples, self.config.method, self.config.mu, self.config.k
            )
            states = sample_initial_states(
                self.config.rollouts_per_query, self._rng(n, _STREAM_INIT_STATES), self.model
            )
            bundle = generate_query(
                pair,
                states,
                self.model,
                iteration=n,
                tolerance=self.config.vi_tolerance,
                max_steps=self.config.max_steps,
            )
            self._pending = (bundle, time.perf_counter() - start)
        return self._pending[0]

    def submit(self, response: int) -> IterationMetrics:
        if self._pending is None:
            self.current_query()
        bundle, gen_time = self._pending
        n = self._completed + 1
        record = PreferenceRecord(bundle.rollouts_a, bundle.rollouts_b, response)
        start = time.perf_counter()
        init = self._estimate if self._estimate is not None else CENTROID
        self.records.append(record)
        self.samples = adaptive_metropolis(
            self.records,
            self.config.sample_count,
            self._rng(n, _STREAM_MCMC),
            self.model,
            initial=init,
        )
        self._estimate = estimate_weights(self.samples)
        update_time = time.perf_counter() - start
        cosine = None
        if self.config.w_true is not None:
            cosine = cosine_similarity(self.samples, np.asarray(self.config.w_true))
        metrics = IterationMetrics(
            iteration=n,
            method=self.config.method,
            mu_or_k=self.config.mu if self.config.method == "multiobjective" else self.config.k,
            epsilon=self.config.epsilon,
            cosine_similarity=cosine,
            acceptance_rate=self.samples.acceptance_rate,
            pair_first=tuple(bundle.pair.w_first.as_array()),
            pair_second=tuple(bundle.pair.w_second.as_array()),
            estimate=tuple(self._estimate.as_array()),
            posterior_std=tuple(self.samples.samples.std(axis=0, ddof=1)),
            wall_time_s=gen_time + update_time,
        )
        self.history.append(metrics)
        self._completed += 1
        self._pending = None
        if self.writer is not None:
            self.writer.on_record(record, metrics)
            self.writer.on_posterior(n, self.samples, self._estimate)
        return metrics

    def restore(
        self,
        records: list[PreferenceRecord],
        history: list[IterationMetrics],
    ) -> None:
        """Rebuild engine state from persisted records (resume path).

        Re-runs the final MCMC update with its original seed and chain start
        so the regenerated samples match the uninterrupted session exactly.
        """
        if self.records:
            raise RuntimeError("can only restore a fresh engine")
        if not records:
            return
        n = len(records)
        if n > self.config.max_iter:
            raise ValueError("session file contains more records than max_iter")
        self.records = list(records)
        self.history = list(history)
        init = (
            RewardWeights.from_array(history[-2].estimate) if n >= 2 else CENTROID
        )
        self.samples = adaptive_metropolis(
            self.records,
            self.config.sample_count,
            self._rng(n, _STREAM_MCMC),
            self.model,
            initial=init,
        )
        self._estimate = estimate_weights(self.samples)
        self._completed = n

    def state(self) -> SessionState:
        return SessionState(
            records=list(self.records),
            samples=self.samples,
            history=list(self.history),
            estimate=self.estimate,
        )


def reward_iteration(
    config: ExperimentConfig,
    expert: SimulatedExpert | Callable[[QueryBundle], int],
    model: LandingModel | None = None,
    writer: SessionWriter | None = None,
) -> SessionState:
    """Run the full loop for ``config.max_iter`` queries and return the session.

    ``expert`` is either a SimulatedExpert or any callable mapping a
    QueryBundle to a response in {+1, -1}. A SimulatedExpert's rng is
    re-derived from the session seed at every iteration, which keeps full
    sessions reproducible and resumable.
    """
    engine = SessionEngine(config, model=model, writer=writer)
    drive_with_expert(engine, expert)
    return engine.state()


def drive_with_expert(
    engine: SessionEngine, expert: SimulatedExpert | Callable[[QueryBundle], int]
) -> None:
    """Answer the engine's remaining queries with the given expert."""
    while not engine.done:
        bundle = engine.current_query()
        if isinstance(expert, SimulatedExpert):
            expert.rng = engine._rng(bundle.iteration, _STREAM_EXPERT)
            response = simulated_response(expert, bundle, engine.model).response
        else:
            response = int(expert(bundle))
        engine.submit(response)


def final_stochastic_model(
    weights: RewardWeights,
    precision: float,
    sample_count: int,
    rng: np.random.Generator,
    model: LandingModel,
    initial_state: LandingState | None = None,
    tolerance: float = 1e-4,
    max_steps: int = 600,
) -> list[Trajectory]:
    """Sample trajectories from the softmax policy of the solved MDP.

    This is the emitted trajectory model: solve once for ``weights``, then
    roll out ``sample_count`` trajectories under the precision-``precision``
    softmax policy. With ``initial_state`` unset, initial states are drawn
    from the approach band; otherwise every rollout starts there.
    """
    if precision < 0:
        raise ValueError("precision must be non-negative")
    q = model.solve(weights, tolerance)
    policy = softmax_policy(q, precision)
    if initial_state is None:
        states = sample_initial_states(sample_count, rng, model)
    else:
        states = [initial_state] * sample_count
    return [
        rollout(model.mdp, policy, model.state_index(s), max_steps, rng) for s in states
    ]
