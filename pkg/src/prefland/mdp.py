"""Finite-MDP machinery: value iteration, policies, and rollouts.

Everything here is domain-agnostic. Transitions are deterministic
(one successor per state-action pair) and terminal states are absorbing.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._kernels import value_sweeps

DEFAULT_DISCOUNT = 0.99
DEFAULT_TOLERANCE = 1e-4
DEFAULT_ITERATION_CAP = 10_000
DEFAULT_MAX_STEPS = 600


class ValueIterationError(RuntimeError):
    """Raised when value iteration fails to converge within the iteration cap."""


@dataclass(frozen=True)
class FiniteMDP:
    """Deterministic finite MDP.

    ``next_state[s, a]`` is the successor of state ``s`` under action ``a``
    and ``terminal[s]`` marks absorbing states. Terminal states must map to
    themselves under every action.
    """

    state_count: int
    action_count: int
    next_state: np.ndarray
    terminal: np.ndarray
    discount: float = DEFAULT_DISCOUNT

    def __post_init__(self):
        nxt = np.asarray(self.next_state, dtype=np.int64)
        term = np.asarray(self.terminal, dtype=bool)
        object.__setattr__(self, "next_state", nxt)
        object.__setattr__(self, "terminal", term)
        if nxt.shape != (self.state_count, self.action_count):
            raise ValueError(
                f"next_state shape {nxt.shape} does not match "
                f"({self.state_count}, {self.action_count})"
            )
        if term.shape != (self.state_count,):
            raise ValueError("terminal mask must have one entry per state")
        if nxt.min() < 0 or nxt.max() >= self.state_count:
            raise ValueError("next_state contains out-of-range state indices")
        if not (0.0 < self.discount < 1.0):
            raise ValueError("discount must lie strictly inside (0, 1)")
        tstates = np.flatnonzero(term)
        if tstates.size and not np.array_equal(
            nxt[tstates], np.repeat(tstates[:, None], self.action_count, axis=1)
        ):
            raise ValueError("terminal states must be absorbing self-loops")

    @classmethod
    def from_functions(
        cls,
        state_count: int,
        action_count: int,
        transition: Callable[[int, int], int],
        terminal: Callable[[int], bool],
        discount: float = DEFAULT_DISCOUNT,
    ) -> "FiniteMDP":
        """Tabulate callable transition/terminal maps into dense arrays."""
        term = np.fromiter(
            (terminal(s) for s in range(state_count)), dtype=bool, count=state_count
        )
        nxt = np.empty((state_count, action_count), dtype=np.int64)
        for s in range(state_count):
            if term[s]:
                nxt[s, :] = s
                continue
            for a in range(action_count):
                nxt[s, a] = transition(s, a)
        return cls(state_count, action_count, nxt, term, discount)


@dataclass(frozen=True)
class QTable:
    """Optimal action values, indexed by (state, action)."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if not np.all(np.isfinite(vals)):
            raise ValueError("QTable entries must be finite")


@dataclass(frozen=True)
class Trajectory:
    """A single rollout: (state, action) pairs plus a landed flag.

    The arrival state is included as the final pair; ``landed`` is true iff
    that state is terminal.
    """

    states: tuple[int, ...]
    actions: tuple[int, ...]
    landed: bool

    def __len__(self) -> int:
        return len(self.states)

    @property
    def steps(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.states, self.actions))


def _materialize_reward(
    mdp: FiniteMDP, reward: Callable[[int, int], float] | np.ndarray
) -> np.ndarray:
    if callable(reward):
        table = np.empty((mdp.state_count, mdp.action_count), dtype=np.float64)
        for s in range(mdp.state_count):
            for a in range(mdp.action_count):
                table[s, a] = reward(s, a)
    else:
        table = np.asarray(reward, dtype=np.float64)
        if table.shape != (mdp.state_count, mdp.action_count):
            raise ValueError("reward table shape does not match the MDP")
    if not np.all(np.isfinite(table)):
        raise ValueError("reward must be finite on every state-action pair")
    return table


def value_iteration(
    mdp: FiniteMDP,
    reward: Callable[[int, int], float] | np.ndarray,
    tolerance: float = DEFAULT_TOLERANCE,
    iteration_cap: int = DEFAULT_ITERATION_CAP,
) -> QTable:
    """Solve for Q* by synchronous full sweeps of the Bellman update.

    Stops once the sup-norm change between sweeps drops to ``tolerance``,
    which bounds the Bellman residual by ``discount * tolerance``. ``reward``
    may be a callable or a dense (state, action) array.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    r = _materialize_reward(mdp, reward)
    q, sweeps = value_sweeps(r, mdp.next_state, mdp.discount, tolerance, iteration_cap)
    if sweeps < 0:
        raise ValueIterationError(
            f"value iteration did not reach tolerance {tolerance} within "
            f"{iteration_cap} sweeps; reward magnitudes may be divergent"
        )
    return QTable(q)


def greedy_action(q: QTable, state: int) -> int:
    """Argmax action at ``state``; ties break toward the lowest index."""
    return int(np.argmax(q.values[state]))


def greedy_policy(q: QTable) -> Callable[[int], int]:
    """Deterministic policy closure over a precomputed argmax table."""
    actions = np.argmax(q.values, axis=1)
    return lambda state: int(actions[state])


def softmax_probabilities(q: QTable, state: int, precision: float) -> np.ndarray:
    """Boltzmann action distribution exp(precision * Q) / sum, max-stabilized.

    precision = 0 gives the uniform distribution; large precision approaches
    the greedy policy.
    """
    if precision < 0 or not np.isfinite(precision):
        raise ValueError("precision must be finite and non-negative")
    row = q.values[state]
    z = precision * (row - row.max())
    p = np.exp(z)
    return p / p.sum()


def softmax_policy(q: QTable, precision: float) -> Callable[[int], np.ndarray]:
    """Stochastic policy closure; rows are precomputed for rollout speed."""
    z = precision * (q.values - q.values.max(axis=1, keepdims=True))
    probs = np.exp(z)
    probs /= probs.sum(axis=1, keepdims=True)
    return lambda state: probs[state]


def rollout(
    mdp: FiniteMDP,
    policy: Callable[[int], int | np.ndarray],
    initial_state: int,
    max_steps: int = DEFAULT_MAX_STEPS,
    rng: np.random.Generator | None = None,
) -> Trajectory:
    """Roll the policy out from ``initial_state``.

    ``policy`` returns either an action index or a probability vector over
    actions; the latter requires ``rng``. Stops on reaching a terminal state
    or after ``max_steps`` decision steps, whichever comes first.
    """
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    states: list[int] = []
    actions: list[int] = []
    s = int(initial_state)
    terminal = mdp.terminal
    nxt = mdp.next_state
    action_ids = np.arange(mdp.action_count)
    for _ in range(max_steps):
        out = policy(s)
        if isinstance(out, (int, np.integer)):
            a = int(out)
        elif terminal[s]:
            # the arrival action is a placeholder; keep it deterministic
            a = int(np.argmax(out))
        else:
            if rng is None:
                raise ValueError("stochastic policies require a seeded rng")
            a = int(rng.choice(action_ids, p=np.asarray(out)))
        states.append(s)
        actions.append(a)
        if terminal[s]:
            break
        s = int(nxt[s, a])
    return Trajectory(tuple(states), tuple(actions), landed=bool(terminal[states[-1]]))
