"""Bayesian posterior over reward weights from pairwise preference responses.

The posterior lives on the 2-simplex: weights are parameterized by their free
coordinates (alpha, beta) with gamma_accel = 1 - alpha - beta, under a uniform
prior. Sampling uses an adaptive random-walk Metropolis chain whose proposal
covariance tracks the chain history.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import metropolis_chain
from .landing import LandingModel, RewardWeights, TrajectorySet

MIN_COMPONENT = 1e-4
# log density of the uniform prior on the unit right triangle (area 1/2)
_LOG_PRIOR = math.log(2.0)

DEFAULT_BURN_IN = 1000
DEFAULT_THINNING = 5
DEFAULT_WARMUP = 200
PROPOSAL_REGULARIZATION = 1e-6
INITIAL_PROPOSAL_STD = 0.05
# Haario scaling 2.38^2 / d for d = 2 free dimensions
PROPOSAL_SCALE = 2.38 ** 2 / 2.0
ACCEPTANCE_BAND = (0.05, 0.7)

CENTROID = RewardWeights(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


class MCMCDiagnosticWarning(RuntimeWarning):
    """Post-adaptation acceptance rate left the healthy band."""


@dataclass(frozen=True)
class PreferenceRecord:
    """One answered query: two trajectory sets and the response.

    response is +1 when the first set was preferred, -1 otherwise. Both sets
    must start from the same initial states.
    """

    tau_a: TrajectorySet
    tau_b: TrajectorySet
    response: int

    def __post_init__(self):
        if self.response not in (1, -1):
            raise ValueError("response must be +1 or -1")
        starts_a = [t.states[0] for t in self.tau_a.trajectories]
        starts_b = [t.states[0] for t in self.tau_b.trajectories]
        if starts_a != starts_b:
            raise ValueError("both trajectory sets must share their initial states")


@dataclass(frozen=True)
class PosteriorSamples:
    """MCMC sample set approximating the weight posterior.

    samples is an (M, 3) array whose rows satisfy the simplex constraints;
    acceptance_rate is the realized post-warm-up Metropolis acceptance rate.
    """

    samples: np.ndarray
    acceptance_rate: float

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", arr)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError("samples must be an (M, 3) array")
        if not 0.0 <= self.acceptance_rate <= 1.0:
            raise ValueError("acceptance_rate must lie in [0, 1]")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def free_coords(self) -> np.ndarray:
        """(M, 2) view of the (alpha, beta) coordinates."""
        return self.samples[:, :2]


def feature_gap(record: PreferenceRecord, model: LandingModel) -> np.ndarray:
    """Mean-feature difference Phi(tau_a) - Phi(tau_b) as a length-3 vector."""
    return model.mean_features(record.tau_a) - model.mean_features(record.tau_b)


def likelihood(record: PreferenceRecord, weights: RewardWeights, model: LandingModel) -> float:
    """Sigmoid probability of the recorded response under ``weights``.

    Equals sigmoid(response * (R_w(tau_a) - R_w(tau_b))) with the reward gap
    taken from the trajectory-set rewards; evaluated in log space so extreme
    gaps cannot overflow.
    """
    gap = model.trajectory_set_reward(record.tau_a, weights) - model.trajectory_set_reward(
        record.tau_b, weights
    )
    z = record.response * gap
    return math.exp(-np.logaddexp(0.0, -z))


def log_posterior(
    weights: RewardWeights | np.ndarray,
    records: list[PreferenceRecord],
    model: LandingModel,
) -> float:
    """Unnormalized log posterior: uniform prior plus response log-likelihoods.

    Accepts raw length-3 arrays as well as RewardWeights so off-simplex points
    can be scored (they return -inf).
    """
    w = weights.as_array() if isinstance(weights, RewardWeights) else np.asarray(weights, float)
    if w.min() < MIN_COMPONENT or abs(w.sum() - 1.0) > 1e-9:
        return -math.inf
    total = _LOG_PRIOR
    for record in records:
        z = record.response * float(feature_gap(record, model) @ w)
        total -= float(np.logaddexp(0.0, -z))
    return total


def _free_affine(records: list[PreferenceRecord], model: LandingModel) -> tuple[np.ndarray, np.ndarray]:
    """Rewrite each record's signed reward gap as g . (alpha, beta) + c."""
    n = len(records)
    gg = np.zeros((max(n, 1), 2), dtype=np.float64)
    cc = np.zeros(max(n, 1), dtype=np.float64)
    for i, record in enumerate(records):
        d = record.response * feature_gap(record, model)
        gg[i, 0] = d[0] - d[2]
        gg[i, 1] = d[1] - d[2]
        cc[i] = d[2]
    if n == 0:
        return gg[:0], cc[:0]
    return gg, cc


def sample_uniform_simplex(
    count: int, rng: np.random.Generator, min_component: float = MIN_COMPONENT
) -> PosteriorSamples:
    """Uniform draws over the weight simplex, respecting strict positivity."""
    rows = np.empty((count, 3), dtype=np.float64)
    filled = 0
    while filled < count:
        ab = rng.random((count - filled, 2))
        flip = ab.sum(axis=1) > 1.0
        ab[flip] = 1.0 - ab[flip]
        g = 1.0 - ab.sum(axis=1)
        ok = (ab[:, 0] >= min_component) & (ab[:, 1] >= min_component) & (g >= min_component)
        took = int(ok.sum())
        rows[filled : filled + took, 0] = ab[ok, 0]
        rows[filled : filled + took, 1] = ab[ok, 1]
        rows[filled : filled + took, 2] = g[ok]
        filled += took
    return PosteriorSamples(rows, acceptance_rate=1.0)


def adaptive_metropolis(
    records: list[PreferenceRecord],
    sample_count: int,
    rng: np.random.Generator,
    model: LandingModel,
    initial: RewardWeights = CENTROID,
    burn_in: int = DEFAULT_BURN_IN,
    thinning: int = DEFAULT_THINNING,
    warmup: int = DEFAULT_WARMUP,
) -> PosteriorSamples:
    """Draw ``sample_count`` posterior samples with adaptive random-walk MCMC.

    The chain walks the free (alpha, beta) coordinates starting from
    ``initial``; off-simplex proposals are rejected through the -inf prior.
    After ``warmup`` fixed-width steps the proposal covariance follows the
    chain's running covariance scaled by 2.38^2/d with a small diagonal
    regularization. Post-burn-in states are kept every ``thinning`` steps.
    """
    if sample_count < 100:
        raise ValueError("sample_count must be at least 100")
    gg, cc = _free_affine(records, model)
    total = burn_in + sample_count * thinning
    normals = rng.standard_normal((total, 2))
    log_unifs = np.log(rng.random(total))
    out = np.empty((sample_count, 2), dtype=np.float64)
    accepted = metropolis_chain(
        float(initial.alpha),
        float(initial.beta),
        gg,
        cc,
        normals,
        log_unifs,
        warmup,
        INITIAL_PROPOSAL_STD,
        PROPOSAL_REGULARIZATION,
        PROPOSAL_SCALE,
        MIN_COMPONENT,
        burn_in,
        thinning,
        out,
    )
    rate = accepted / max(total - warmup, 1)
    if not ACCEPTANCE_BAND[0] <= rate <= ACCEPTANCE_BAND[1]:
        warnings.warn(
            f"Metropolis acceptance rate {rate:.3f} outside "
            f"[{ACCEPTANCE_BAND[0]}, {ACCEPTANCE_BAND[1]}]",
            MCMCDiagnosticWarning,
            stacklevel=2,
        )
    rows = np.empty((sample_count, 3), dtype=np.float64)
    rows[:, :2] = out
    rows[:, 2] = 1.0 - out.sum(axis=1)
    return PosteriorSamples(rows, acceptance_rate=float(rate))


def estimate_weights(samples: PosteriorSamples) -> RewardWeights:
    """Component-wise sample mean, renormalized onto the simplex."""
    if len(samples) == 0:
        raise ValueError("cannot estimate weights from an empty sample set")
    mean = samples.samples.mean(axis=0)
    mean = mean / mean.sum()
    return RewardWeights.from_array(mean)
