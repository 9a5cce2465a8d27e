"""Query selection: pick the pair of posterior samples defining the next query.

Both selectors work in the free (alpha, beta) coordinates of the weight
simplex. The multiobjective rule trades sample density against pair distance;
probabilistic Q-Eval picks the pair whose bisecting hyperplane passes nearest
the sample centroid while splitting the samples most evenly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .landing import RewardWeights
from .preferences import PosteriorSamples

METHOD_MULTIOBJECTIVE = "multiobjective"
METHOD_QEVAL = "probabilistic_qeval"

MIN_BANDWIDTH = 1e-3
HYPERPLANE_ATOL = 1e-12
DEFAULT_MU = 500.0
DEFAULT_K = 10


@dataclass(frozen=True)
class QueryPair:
    """Two distinct weight vectors drawn from the posterior sample set."""

    w_first: RewardWeights
    w_second: RewardWeights
    method: str
    score: float

    def __post_init__(self):
        if self.w_first == self.w_second:
            raise ValueError("query pair must contain two distinct weight vectors")


def _bandwidths(points: np.ndarray) -> np.ndarray:
    """Scott's-rule per-dimension bandwidths with a degenerate-variance floor."""
    m = points.shape[0]
    if m > 1:
        sigma = points.std(axis=0, ddof=1)
    else:
        sigma = np.zeros(points.shape[1])
    h = sigma * m ** (-1.0 / 6.0)
    return np.where(h > 0.0, h, MIN_BANDWIDTH)


def _kde_batch(data: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Gaussian product-kernel density of ``data`` evaluated at ``points``."""
    h = _bandwidths(data)
    za = (points[:, 0:1] - data[None, :, 0]) / h[0]
    zb = (points[:, 1:2] - data[None, :, 1]) / h[1]
    kernel = np.exp(-0.5 * (za * za + zb * zb))
    return kernel.sum(axis=1) / (data.shape[0] * 2.0 * np.pi * h[0] * h[1])


def kde_density(samples: PosteriorSamples, point: RewardWeights | np.ndarray) -> float:
    """Kernel density estimate of the posterior at one weight vector."""
    if len(samples) == 0:
        raise ValueError("cannot evaluate a density with no samples")
    if isinstance(point, RewardWeights):
        p = np.array([[point.alpha, point.beta]])
    else:
        p = np.asarray(point, dtype=np.float64)[:2][None, :]
    return float(_kde_batch(samples.free_coords, p)[0])


def _pair_arrays(free: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = free.shape[0]
    iu, ju = np.triu_indices(m, 1)
    norms = np.hypot(free[iu, 0] - free[ju, 0], free[iu, 1] - free[ju, 1])
    return iu, ju, norms


def _lowest_pair(candidate_scores: np.ndarray, iu: np.ndarray, ju: np.ndarray) -> int:
    """Index of the best score; exact ties resolve to the smallest (i, j)."""
    best = candidate_scores.max()
    tied = np.flatnonzero(candidate_scores == best)
    order = np.lexsort((ju[tied], iu[tied]))
    return int(tied[order[0]])


def multiobjective_select(samples: PosteriorSamples, mu: float = DEFAULT_MU) -> QueryPair:
    """Maximize p(w_i) p(w_j) + mu * ||w_i - w_j|| over all distinct pairs.

    Densities come from the Gaussian KDE over the sample set itself and the
    distance is taken in the free coordinates. The scan is exhaustive.
    """
    if len(samples) < 2:
        raise ValueError("need at least 2 samples to select a query pair")
    if mu < 0:
        raise ValueError("mu must be non-negative")
    free = samples.free_coords
    dens = _kde_batch(free, free)
    iu, ju, norms = _pair_arrays(free)
    valid = norms > 0.0
    if not valid.any():
        raise ValueError("all sample pairs coincide; cannot form a query")
    scores = np.where(valid, dens[iu] * dens[ju] + mu * norms, -np.inf)
    best = _lowest_pair(scores, iu, ju)
    return QueryPair(
        w_first=RewardWeights.from_array(samples.samples[iu[best]]),
        w_second=RewardWeights.from_array(samples.samples[ju[best]]),
        method=METHOD_MULTIOBJECTIVE,
        score=float(scores[best]),
    )


def probabilistic_qeval_select(samples: PosteriorSamples, k: int = DEFAULT_K) -> QueryPair:
    """Bisecting-hyperplane query selection.

    Among the k distinct hyperplanes closest to the sample centroid (chain
    samples repeat, and coincident pairs bisect identically), return the pair
    splitting the samples most evenly; the split ratio is min/max of the two
    side counts, and points within HYPERPLANE_ATOL of a hyperplane count
    toward neither side.
    """
    if len(samples) < 2:
        raise ValueError("need at least 2 samples to select a query pair")
    if k < 1:
        raise ValueError("k must be at least 1")
    free = samples.free_coords
    centroid = free.mean(axis=0)
    iu, ju, norms = _pair_arrays(free)
    valid = norms > 0.0
    if not valid.any():
        raise ValueError("all sample pairs coincide; cannot form a query")
    # distance from the centroid to the bisecting hyperplane of (i, j):
    # |(c - midpoint) . (x_i - x_j)| / ||x_i - x_j|| reduces to |u_i - u_j| / norm
    u = free @ centroid - 0.5 * (free * free).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        dist = np.abs(u[iu] - u[ju]) / norms
    vi = np.flatnonzero(valid)
    ranked = vi[np.lexsort((ju[vi], iu[vi], dist[vi]))]
    order = []
    seen = set()
    for idx in ranked:
        a = (free[iu[idx], 0], free[iu[idx], 1])
        b = (free[ju[idx], 0], free[ju[idx], 1])
        key = (a, b) if a <= b else (b, a)
        if key in seen:
            continue
        seen.add(key)
        order.append(idx)
        if len(order) == k:
            break
    order = np.asarray(order)

    ratios = np.empty(order.size, dtype=np.float64)
    for n, idx in enumerate(order):
        i, j = iu[idx], ju[idx]
        normal = (free[i] - free[j]) / norms[idx]
        signed = (free - 0.5 * (free[i] + free[j])) @ normal
        pos = int((signed > HYPERPLANE_ATOL).sum())
        neg = int((signed < -HYPERPLANE_ATOL).sum())
        hi = max(pos, neg)
        ratios[n] = min(pos, neg) / hi if hi else 0.0
    best = _lowest_pair(ratios, iu[order], ju[order])
    idx = order[best]
    return QueryPair(
        w_first=RewardWeights.from_array(samples.samples[iu[idx]]),
        w_second=RewardWeights.from_array(samples.samples[ju[idx]]),
        method=METHOD_QEVAL,
        score=float(ratios[best]),
    )


def select_query(samples: PosteriorSamples, method: str, mu: float = DEFAULT_MU,
                 k: int = DEFAULT_K) -> QueryPair:
    if method == METHOD_MULTIOBJECTIVE:
        return multiobjective_select(samples, mu)
    if method == METHOD_QEVAL:
        return probabilistic_qeval_select(samples, k)
    raise ValueError(f"unknown query selection method: {method!r}")
