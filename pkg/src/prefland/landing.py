"""Vertical-landing MDP: discretization grids, kinematics, and reward features.

The state is (altitude, vertical rate, ground speed, previous action) on fixed
grids; the action pairs a vertical with a horizontal acceleration command.
Transitions apply constant-acceleration kinematics for one time step and snap
back to the grid, so the dynamics stay deterministic and finite.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .mdp import (
    DEFAULT_DISCOUNT,
    DEFAULT_TOLERANCE,
    FiniteMDP,
    QTable,
    Trajectory,
    greedy_policy,
    rollout,
    value_iteration,
)

SIMPLEX_ATOL = 1e-12
BETA_RATIO_CAP = 1000.0
# Sharpness of the trajectory-set comparison reward. Calibrated feature
# totals land in roughly [-1, 0] per component; this multiplier sets how
# decisively a unit reward gap separates the two sides of a query.
COMPARISON_SHARPNESS = 5.0

# Grid sizes are load-bearing: 50 * 4 * 15 * 16 = 48000 states, 16 joint actions.
_COUNTS = {"h": 50, "h_dot": 4, "x_dot": 15, "vertical": 4, "horizontal": 4}


@dataclass(frozen=True)
class GridConfig:
    """Discretization grids for the landing state and action spaces.

    The lowest altitude bin is the touchdown layer: reaching it ends the
    episode. Keeping it above zero bounds the speed/altitude penalty ratio by
    physically reachable values instead of the h -> 0 cap.
    """

    h_values: tuple[float, ...] = tuple(float(v) for v in range(10, 510, 10))
    h_dot_values: tuple[float, ...] = (-16.0, -8.0, 0.0, 8.0)
    x_dot_values: tuple[float, ...] = tuple(float(v) for v in range(-5, 70, 5))
    vertical_accel_values: tuple[float, ...] = (-4.0, 0.0, 4.0, 8.0)
    horizontal_accel_values: tuple[float, ...] = (-8.0, -4.0, 0.0, 4.0)

    def __post_init__(self):
        sizes = {
            "h": len(self.h_values),
            "h_dot": len(self.h_dot_values),
            "x_dot": len(self.x_dot_values),
            "vertical": len(self.vertical_accel_values),
            "horizontal": len(self.horizontal_accel_values),
        }
        for name, expected in _COUNTS.items():
            if sizes[name] != expected:
                raise ValueError(
                    f"{name} grid must have {expected} values, got {sizes[name]}"
                )
        for name in ("h_values", "h_dot_values", "x_dot_values",
                     "vertical_accel_values", "horizontal_accel_values"):
            vals = getattr(self, name)
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        if 0.0 not in self.vertical_accel_values or 0.0 not in self.horizontal_accel_values:
            raise ValueError("each acceleration grid must include 0")

    @property
    def state_count(self) -> int:
        return 48000

    @property
    def action_count(self) -> int:
        return 16


DEFAULT_GRIDS = GridConfig()


@dataclass(frozen=True)
class LandingState:
    """Altitude (ft), vertical rate (ft/s), ground speed (ft/s), previous action index."""

    h: float
    h_dot: float
    x_dot: float
    a_prev: int


@dataclass(frozen=True)
class JointAction:
    vertical_accel: float
    horizontal_accel: float


@dataclass(frozen=True)
class RewardWeights:
    """Learnable penalty weights on the probability simplex.

    alpha scales the jerk penalty, beta the speed-near-ground penalty and
    gamma_accel the acceleration penalty; all strictly positive with
    alpha + beta + gamma_accel = 1.
    """

    alpha: float
    beta: float
    gamma_accel: float

    def __post_init__(self):
        total = self.alpha + self.beta + self.gamma_accel
        if min(self.alpha, self.beta, self.gamma_accel) <= 0.0:
            raise ValueError("reward weights must be strictly positive")
        if abs(total - 1.0) > SIMPLEX_ATOL:
            raise ValueError(f"reward weights must sum to 1, got {total!r}")

    @classmethod
    def from_array(cls, w) -> "RewardWeights":
        a, b, g = (float(v) for v in w)
        return cls(a, b, g)

    @classmethod
    def from_free(cls, alpha: float, beta: float) -> "RewardWeights":
        return cls(float(alpha), float(beta), 1.0 - (float(alpha) + float(beta)))

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma_accel], dtype=np.float64)


@dataclass(frozen=True)
class FixedRewardParams:
    """Reward parameters held fixed rather than learned."""

    landing_reward: float = 10000.0
    backward_penalty: float = -0.1
    h_pen: float = 50.0


DEFAULT_FIXED = FixedRewardParams()


@dataclass(frozen=True)
class FeatureVector:
    """Normalized non-positive penalty features, ordered to match RewardWeights."""

    phi_jerk: float
    phi_beta: float
    phi_accel: float

    def as_array(self) -> np.ndarray:
        return np.array([self.phi_jerk, self.phi_beta, self.phi_accel], dtype=np.float64)


@dataclass(frozen=True)
class TrajectorySet:
    """Rollouts of one policy from a shared list of initial states."""

    trajectories: tuple[Trajectory, ...]

    def __len__(self) -> int:
        return len(self.trajectories)

    @property
    def all_landed(self) -> bool:
        return all(t.landed for t in self.trajectories)


def snap_to_grid(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Indices of the nearest grid points, clamped; exact midpoints snap low."""
    values = np.asarray(values, dtype=np.float64)
    hi = np.clip(np.searchsorted(grid, values), 0, len(grid) - 1)
    lo = np.maximum(hi - 1, 0)
    take_lo = (values - grid[lo]) <= (grid[hi] - values)
    return np.where(take_lo, lo, hi)


def transition(
    state: LandingState,
    action: JointAction,
    time_step: float = 1.0,
    grids: GridConfig = DEFAULT_GRIDS,
) -> LandingState:
    """Deterministic successor: constant-acceleration kinematics, then grid snap.

    Ground-level states (lowest altitude grid value) are absorbing and return
    themselves unchanged.
    """
    h_grid = np.asarray(grids.h_values)
    if state.h == grids.h_values[0]:
        return state
    dt = float(time_step)
    h2 = state.h + state.h_dot * dt + 0.5 * action.vertical_accel * dt * dt
    hd2 = state.h_dot + action.vertical_accel * dt
    xd2 = state.x_dot + action.horizontal_accel * dt
    hd_grid = np.asarray(grids.h_dot_values)
    xd_grid = np.asarray(grids.x_dot_values)
    av_idx = grids.vertical_accel_values.index(action.vertical_accel)
    ah_idx = grids.horizontal_accel_values.index(action.horizontal_accel)
    return LandingState(
        h=float(h_grid[snap_to_grid(h2, h_grid)]),
        h_dot=float(hd_grid[snap_to_grid(hd2, hd_grid)]),
        x_dot=float(xd_grid[snap_to_grid(xd2, xd_grid)]),
        a_prev=av_idx * 4 + ah_idx,
    )


class LandingModel:
    """Precomputed landing MDP: transition table, feature tables, and solver."""

    def __init__(
        self,
        grids: GridConfig = DEFAULT_GRIDS,
        fixed: FixedRewardParams = DEFAULT_FIXED,
        time_step: float = 1.0,
        discount: float = DEFAULT_DISCOUNT,
    ):
        if time_step <= 0:
            raise ValueError("time_step must be positive")
        self.grids = grids
        self.fixed = fixed
        self.time_step = float(time_step)
        self._shape = (50, 4, 15, 16)

        h_grid = np.asarray(grids.h_values)
        hd_grid = np.asarray(grids.h_dot_values)
        xd_grid = np.asarray(grids.x_dot_values)
        av = np.asarray(grids.vertical_accel_values)
        ah = np.asarray(grids.horizontal_accel_values)
        self._h_grid, self._hd_grid, self._xd_grid = h_grid, hd_grid, xd_grid
        # action index a = 4 * vertical_index + horizontal_index
        self._action_av = np.repeat(av, 4)
        self._action_ah = np.tile(ah, 4)

        n = grids.state_count
        h_i, hd_i, xd_i, ap_i = np.unravel_index(np.arange(n), self._shape)
        self._state_h = h_grid[h_i]
        self._state_hd = hd_grid[hd_i]
        self._state_xd = xd_grid[xd_i]
        self._state_ap = ap_i
        terminal = h_i == 0

        dt = self.time_step
        nxt = np.empty((n, 16), dtype=np.int64)
        for a in range(16):
            h2 = self._state_h + self._state_hd * dt + 0.5 * self._action_av[a] * dt * dt
            hd2 = self._state_hd + self._action_av[a] * dt
            xd2 = self._state_xd + self._action_ah[a] * dt
            nxt[:, a] = np.ravel_multi_index(
                (
                    snap_to_grid(h2, h_grid),
                    snap_to_grid(hd2, hd_grid),
                    snap_to_grid(xd2, xd_grid),
                    np.full(n, a),
                ),
                self._shape,
            )
        nxt[terminal] = np.flatnonzero(terminal)[:, None]
        self.mdp = FiniteMDP(n, 16, nxt, terminal, discount)

        # Feature normalizers come from the maximum raw magnitude over the grid
        # so every feature spans [-1, 0].
        diff_v = self._action_av[:, None] - self._action_av[None, :]
        diff_h = self._action_ah[:, None] - self._action_ah[None, :]
        jerk_raw = np.hypot(diff_v, diff_h)
        accel_raw = np.hypot(self._action_av, self._action_ah)
        self._jerk_norm = jerk_raw.max() or 1.0
        self._accel_norm = accel_raw.max() or 1.0
        # jerk_table[a_prev, a]
        self._jerk_table = -jerk_raw / self._jerk_norm
        self._accel_vec = -accel_raw / self._accel_norm

        beta_raw = -self._beta_ratio(self._state_h, self._state_hd, self._state_xd)
        self._beta_norm = np.abs(beta_raw).max() or 1.0
        self._beta_vec = beta_raw / self._beta_norm

        nonterm = ~terminal
        lands = terminal[nxt] & nonterm[:, None]
        self._fixed_table = fixed.landing_reward * lands.astype(np.float64)
        self._fixed_table += (
            fixed.backward_penalty * ((self._state_xd < 0) & nonterm)[:, None]
        )
        self._nonterm_col = nonterm[:, None].astype(np.float64)
        self._feature_scales: np.ndarray | None = None

    def _beta_ratio(self, h, h_dot, x_dot) -> np.ndarray:
        """Raw capped speed/altitude ratio below h_pen; zero at or above it."""
        h = np.asarray(h, dtype=np.float64)
        speed = np.hypot(h_dot, x_dot)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = speed / h
        ratio = np.where(h == 0.0, BETA_RATIO_CAP, ratio)
        ratio = np.minimum(ratio, BETA_RATIO_CAP)
        return np.where(h < self.fixed.h_pen, ratio, 0.0)

    # ------------------------------------------------------------------
    # indexing
    # ------------------------------------------------------------------

    def state_index(self, state: LandingState) -> int:
        return int(
            np.ravel_multi_index(
                (
                    self._grid_lookup(state.h, self._h_grid, "altitude"),
                    self._grid_lookup(state.h_dot, self._hd_grid, "vertical rate"),
                    self._grid_lookup(state.x_dot, self._xd_grid, "ground speed"),
                    state.a_prev,
                ),
                self._shape,
            )
        )

    @staticmethod
    def _grid_lookup(value: float, grid: np.ndarray, label: str) -> int:
        i = int(np.argmin(np.abs(grid - value)))
        if abs(grid[i] - value) > 1e-9:
            raise ValueError(f"{label} value {value} is not on its grid")
        return i

    def state_at(self, index: int) -> LandingState:
        h_i, hd_i, xd_i, ap_i = np.unravel_index(index, self._shape)
        return LandingState(
            h=float(self._h_grid[h_i]),
            h_dot=float(self._hd_grid[hd_i]),
            x_dot=float(self._xd_grid[xd_i]),
            a_prev=int(ap_i),
        )

    def action_index(self, action: JointAction) -> int:
        av_i = self.grids.vertical_accel_values.index(action.vertical_accel)
        ah_i = self.grids.horizontal_accel_values.index(action.horizontal_accel)
        return av_i * 4 + ah_i

    def action_at(self, index: int) -> JointAction:
        return JointAction(
            vertical_accel=float(self._action_av[index]),
            horizontal_accel=float(self._action_ah[index]),
        )

    @property
    def zero_action_index(self) -> int:
        return self.action_index(JointAction(0.0, 0.0))

    def is_terminal_state(self, state: LandingState) -> bool:
        return state.h == self.grids.h_values[0]

    # ------------------------------------------------------------------
    # features and reward
    # ------------------------------------------------------------------

    def features(self, state: LandingState, action: JointAction) -> FeatureVector:
        """Normalized penalty features of one state-action pair."""
        prev = self.action_at(state.a_prev)
        jerk = np.hypot(
            action.vertical_accel - prev.vertical_accel,
            action.horizontal_accel - prev.horizontal_accel,
        )
        accel = np.hypot(action.vertical_accel, action.horizontal_accel)
        beta_raw = self._beta_ratio(state.h, state.h_dot, state.x_dot)
        # off-grid evaluations (e.g. h below the touchdown layer) saturate at -1
        return FeatureVector(
            phi_jerk=max(-float(jerk) / self._jerk_norm, -1.0),
            phi_beta=max(-float(beta_raw) / self._beta_norm, -1.0),
            phi_accel=max(-float(accel) / self._accel_norm, -1.0),
        )

    def reward(self, state: LandingState, action: JointAction, weights: RewardWeights) -> float:
        """Per-step reward: weighted features plus the fixed landing/backward terms.

        Terminal states contribute exactly zero so absorbing self-loops do not
        inflate values; the landing bonus attaches to the transition into the
        terminal layer.
        """
        if self.is_terminal_state(state):
            return 0.0
        phi = self.features(state, action).as_array()
        value = float(weights.as_array() @ phi)
        succ = transition(state, action, self.time_step, self.grids)
        if self.is_terminal_state(succ):
            value += self.fixed.landing_reward
        if state.x_dot < 0:
            value += self.fixed.backward_penalty
        return value

    def reward_table(self, weights: RewardWeights) -> np.ndarray:
        """Dense (state, action) reward array for the solver."""
        w = weights.as_array()
        table = w[0] * self._jerk_table[self._state_ap, :]
        table += w[1] * self._beta_vec[:, None]
        table += w[2] * self._accel_vec[None, :]
        table *= self._nonterm_col
        table += self._fixed_table
        return table

    def solve(self, weights: RewardWeights, tolerance: float = DEFAULT_TOLERANCE) -> QTable:
        return value_iteration(self.mdp, self.reward_table(weights), tolerance)

    # ------------------------------------------------------------------
    # trajectory-set reward
    # ------------------------------------------------------------------

    _CALIBRATION_WEIGHTS = (
        (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
        (0.98, 0.01, 0.01),
        (0.01, 0.98, 0.01),
        (0.01, 0.01, 0.98),
    )

    def _calibration_state_indices(self) -> list[int]:
        """Fixed fan of approach-band states used for feature-scale calibration."""
        n_h = len(self.grids.h_values)
        n_xd = len(self.grids.x_dot_values)
        indices = []
        for h_i in (n_h - n_h // 5, n_h - 1):
            for hd_i in (1, 2):
                for xd_i in (n_xd // 3, 2 * (n_xd // 3) - 1):
                    indices.append(
                        int(
                            np.ravel_multi_index(
                                (h_i, hd_i, xd_i, self.zero_action_index), self._shape
                            )
                        )
                    )
        return indices

    @property
    def feature_scales(self) -> np.ndarray:
        """Per-feature trajectory-total magnitudes balancing the comparison reward.

        Acceleration penalties can accrue on every step while the near-ground
        speed penalty only acts below h_pen, so raw totals would let one
        feature dominate every preference. The scales are the largest
        per-trajectory totals observed across greedy policies solved at the
        simplex centroid and corners, floored at 1, and are deterministic for
        a given grid configuration.
        """
        if self._feature_scales is None:
            scales = np.ones(3)
            starts = self._calibration_state_indices()
            for raw in self._CALIBRATION_WEIGHTS:
                policy = greedy_policy(self.solve(RewardWeights.from_array(raw)))
                for start in starts:
                    traj = rollout(self.mdp, policy, start, 600)
                    if not traj.landed:
                        raise RuntimeError(
                            f"calibration rollout failed to land for weights {raw}"
                        )
                    totals = np.abs(
                        self.step_features(
                            np.asarray(traj.states), np.asarray(traj.actions)
                        ).sum(axis=0)
                    )
                    scales = np.maximum(scales, totals)
            self._feature_scales = scales
        return self._feature_scales

    def step_features(self, states: np.ndarray, actions: np.ndarray) -> np.ndarray:
        """(n, 3) feature rows for flat state/action index arrays."""
        states = np.asarray(states, dtype=np.int64)
        actions = np.asarray(actions, dtype=np.int64)
        return np.column_stack(
            (
                self._jerk_table[self._state_ap[states], actions],
                self._beta_vec[states],
                self._accel_vec[actions],
            )
        )

    def mean_features(self, tau: TrajectorySet) -> np.ndarray:
        """Balanced feature totals per trajectory, averaged over the set.

        Each trajectory contributes the sum of its per-step features divided
        by the calibration scales; the set value is the mean of those totals.
        Averaging over trajectories compares sets of different sizes fairly
        while longer (costlier) landings keep their full weight.
        """
        if len(tau) == 0:
            raise ValueError("trajectory set is empty")
        totals = np.zeros(3)
        for t in tau.trajectories:
            states = np.asarray(t.states, dtype=np.int64)
            actions = np.asarray(t.actions, dtype=np.int64)
            totals += self.step_features(states, actions).sum(axis=0)
        return totals * (COMPARISON_SHARPNESS / (len(tau) * self.feature_scales))

    def trajectory_set_reward(self, tau: TrajectorySet, weights: RewardWeights) -> float:
        """Comparison reward of a trajectory set: weights dotted with the mean
        balanced feature totals. Fixed landing/backward terms are excluded so
        the value reflects only the learnable trade-offs.
        """
        if len(tau) == 0:
            raise ValueError("trajectory set is empty")
        if not tau.all_landed:
            raise ValueError("trajectory set contains rollouts that did not land")
        return float(weights.as_array() @ self.mean_features(tau))


def build_landing_mdp(
    grids: GridConfig = DEFAULT_GRIDS,
    fixed: FixedRewardParams = DEFAULT_FIXED,
    time_step: float = 1.0,
    discount: float = DEFAULT_DISCOUNT,
) -> FiniteMDP:
    """Construct the landing FiniteMDP for the given grids."""
    return LandingModel(grids, fixed, time_step, discount).mdp


@functools.lru_cache(maxsize=4)
def cached_model(
    grids: GridConfig = DEFAULT_GRIDS,
    fixed: FixedRewardParams = DEFAULT_FIXED,
    time_step: float = 1.0,
    discount: float = DEFAULT_DISCOUNT,
) -> LandingModel:
    """Shared read-only model instance; safe because LandingModel is immutable
    after construction."""
    return LandingModel(grids, fixed, time_step, discount)
