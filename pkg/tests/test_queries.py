import math

import numpy as np
import pytest

from prefland.landing import RewardWeights
from prefland.preferences import PosteriorSamples, sample_uniform_simplex
from prefland.queries import (
    HYPERPLANE_ATOL,
    METHOD_MULTIOBJECTIVE,
    METHOD_QEVAL,
    QueryPair,
    kde_density,
    multiobjective_select,
    probabilistic_qeval_select,
)


def as_samples(free_rows):
    rows = np.asarray(free_rows, dtype=np.float64)
    full = np.column_stack([rows, 1.0 - rows.sum(axis=1)])
    return PosteriorSamples(full, 1.0)


def oracle_kde(data, point):
    """Independent product-kernel density with Scott's-rule bandwidths."""
    m = len(data)
    sig = np.std(data, axis=0, ddof=1) if m > 1 else np.zeros(2)
    h = np.where(sig * m ** (-1 / 6) > 0, sig * m ** (-1 / 6), 1e-3)
    total = 0.0
    for row in data:
        za = (point[0] - row[0]) / h[0]
        zb = (point[1] - row[1]) / h[1]
        total += math.exp(-0.5 * (za * za + zb * zb))
    return total / (m * 2 * math.pi * h[0] * h[1])


def oracle_multiobjective(samples, mu):
    free = samples.free_coords
    m = len(free)
    dens = [oracle_kde(free, free[i]) for i in range(m)]
    best, best_score = None, -math.inf
    for i in range(m):
        for j in range(i + 1, m):
            d = math.hypot(free[i, 0] - free[j, 0], free[i, 1] - free[j, 1])
            if d == 0.0:
                continue
            score = dens[i] * dens[j] + mu * d
            if score > best_score:
                best, best_score = (i, j), score
    return best, best_score


def oracle_qeval(samples, k):
    free = samples.free_coords
    m = len(free)
    c = free.mean(axis=0)
    entries = []
    for i in range(m):
        for j in range(i + 1, m):
            n = free[i] - free[j]
            norm = math.hypot(n[0], n[1])
            if norm == 0.0:
                continue
            mid = (free[i] + free[j]) / 2.0
            dist = abs((c - mid) @ n) / norm
            entries.append((dist, i, j))
    entries.sort()
    # candidate pool: the k closest *distinct* hyperplanes
    candidates = []
    seen = set()
    for dist, i, j in entries:
        key = tuple(sorted((tuple(free[i]), tuple(free[j]))))
        if key in seen:
            continue
        seen.add(key)
        candidates.append((dist, i, j))
        if len(candidates) == k:
            break
    best, best_ratio = None, -1.0
    for dist, i, j in candidates:
        n = (free[i] - free[j]) / math.hypot(*(free[i] - free[j]))
        mid = (free[i] + free[j]) / 2.0
        signed = (free - mid) @ n
        pos = int((signed > HYPERPLANE_ATOL).sum())
        neg = int((signed < -HYPERPLANE_ATOL).sum())
        ratio = min(pos, neg) / max(pos, neg) if max(pos, neg) else 0.0
        if ratio > best_ratio or (ratio == best_ratio and (i, j) < best):
            best, best_ratio = (i, j), ratio
    return best, best_ratio


class TestKDE:
    def test_atom_has_maximal_density_at_itself(self):
        samples = as_samples(np.tile([0.3, 0.4], (20, 1)))
        at_atom = kde_density(samples, np.array([0.3, 0.4]))
        for point in ([0.31, 0.4], [0.3, 0.41], [0.5, 0.2]):
            assert at_atom > kde_density(samples, np.array(point))

    def test_density_integrates_to_one(self):
        samples = sample_uniform_simplex(400, np.random.default_rng(0))
        axis = np.linspace(-0.5, 1.5, 401)
        step = axis[1] - axis[0]
        total = 0.0
        for a in axis:
            pts = np.column_stack([np.full_like(axis, a), axis])
            from prefland.queries import _kde_batch

            total += _kde_batch(samples.free_coords, pts).sum() * step * step
        assert abs(total - 1.0) <= 0.01

    def test_far_evaluations_decay(self):
        samples = as_samples(np.random.default_rng(1).uniform(0.2, 0.4, size=(50, 2)) / 2)
        peak = max(kde_density(samples, row) for row in samples.free_coords)
        far = kde_density(samples, np.array([30.0, 30.0]))
        assert far < 1e-10 * peak

    def test_matches_oracle(self):
        samples = sample_uniform_simplex(60, np.random.default_rng(2))
        for point in samples.free_coords[:5]:
            assert kde_density(samples, point) == pytest.approx(
                oracle_kde(samples.free_coords, point), rel=1e-10
            )

    def test_degenerate_dimension_uses_floor_bandwidth(self):
        rows = np.column_stack([np.full(10, 0.25), np.linspace(0.2, 0.4, 10)])
        samples = as_samples(rows)
        value = kde_density(samples, np.array([0.25, 0.3]))
        assert np.isfinite(value) and value > 0

    def test_symmetric_in_sample_order(self):
        rng = np.random.default_rng(3)
        samples = sample_uniform_simplex(40, rng)
        shuffled = PosteriorSamples(
            samples.samples[rng.permutation(40)], samples.acceptance_rate
        )
        point = np.array([0.3, 0.3])
        assert kde_density(samples, point) == pytest.approx(
            kde_density(shuffled, point), rel=1e-12
        )


class TestMultiobjective:
    def test_two_samples_return_that_pair(self):
        samples = as_samples([[0.2, 0.3], [0.5, 0.2]])
        pair = multiobjective_select(samples, 10.0)
        assert pair.method == METHOD_MULTIOBJECTIVE
        assert pair.w_first == RewardWeights.from_array(samples.samples[0])
        assert pair.w_second == RewardWeights.from_array(samples.samples[1])

    def test_mu_zero_maximizes_density_product(self):
        samples = sample_uniform_simplex(40, np.random.default_rng(4))
        pair = multiobjective_select(samples, 0.0)
        (i, j), score = oracle_multiobjective(samples, 0.0)
        assert np.allclose(pair.w_first.as_array(), samples.samples[i])
        assert np.allclose(pair.w_second.as_array(), samples.samples[j])
        assert pair.score == pytest.approx(score, rel=1e-10)

    def test_huge_mu_maximizes_distance(self):
        samples = sample_uniform_simplex(60, np.random.default_rng(5))
        pair = multiobjective_select(samples, 1e6)
        free = samples.free_coords
        best = max(
            (np.hypot(*(free[i] - free[j])), i, j)
            for i in range(60)
            for j in range(i + 1, 60)
        )
        assert np.allclose(pair.w_first.as_array(), samples.samples[best[1]])
        assert np.allclose(pair.w_second.as_array(), samples.samples[best[2]])

    def test_matches_oracle_at_default_mu(self):
        for seed in range(3):
            samples = sample_uniform_simplex(50, np.random.default_rng(seed))
            pair = multiobjective_select(samples, 500.0)
            (i, j), score = oracle_multiobjective(samples, 500.0)
            assert np.allclose(pair.w_first.as_array(), samples.samples[i])
            assert np.allclose(pair.w_second.as_array(), samples.samples[j])
            assert pair.score == pytest.approx(score, rel=1e-10)

    def test_score_is_max_over_all_pairs(self):
        samples = sample_uniform_simplex(80, np.random.default_rng(6))
        pair = multiobjective_select(samples, 500.0)
        free = samples.free_coords
        from prefland.queries import _kde_batch

        dens = _kde_batch(free, free)
        for i in range(80):
            for j in range(i + 1, 80):
                d = np.hypot(*(free[i] - free[j]))
                if d > 0:
                    assert dens[i] * dens[j] + 500.0 * d <= pair.score + 1e-9

    def test_permutation_invariance(self):
        rng = np.random.default_rng(7)
        samples = sample_uniform_simplex(60, rng)
        pair1 = multiobjective_select(samples, 500.0)
        shuffled = PosteriorSamples(samples.samples[rng.permutation(60)], 1.0)
        pair2 = multiobjective_select(shuffled, 500.0)
        got1 = {tuple(pair1.w_first.as_array()), tuple(pair1.w_second.as_array())}
        got2 = {tuple(pair2.w_first.as_array()), tuple(pair2.w_second.as_array())}
        assert got1 == got2
        assert pair1.score == pytest.approx(pair2.score, rel=1e-12)

    def test_duplicate_samples_never_selected_together(self):
        rows = np.array([[0.3, 0.3], [0.3, 0.3], [0.31, 0.3]])
        pair = multiobjective_select(as_samples(rows), 0.0)
        assert pair.w_first != pair.w_second

    def test_all_coincident_rejected(self):
        samples = as_samples(np.tile([0.25, 0.25], (5, 1)))
        with pytest.raises(ValueError):
            multiobjective_select(samples, 500.0)

    def test_requires_two_samples(self):
        with pytest.raises(ValueError):
            multiobjective_select(as_samples([[0.2, 0.2]]), 1.0)
        with pytest.raises(ValueError):
            multiobjective_select(as_samples([[0.2, 0.2], [0.3, 0.3]]), -1.0)


class TestProbabilisticQEval:
    def test_two_samples_return_that_pair(self):
        samples = as_samples([[0.2, 0.3], [0.5, 0.2]])
        pair = probabilistic_qeval_select(samples, 5)
        assert pair.method == METHOD_QEVAL
        assert pair.w_first == RewardWeights.from_array(samples.samples[0])

    def test_symmetric_configuration_selects_center_pair(self):
        # several pairs straddle the centroid; the winner must bisect through
        # it with a perfectly even split
        rows = np.array(
            [[0.2, 0.3], [0.4, 0.3], [0.3, 0.2], [0.3, 0.4], [0.25, 0.25], [0.35, 0.35]]
        )
        samples = as_samples(rows)
        pair = probabilistic_qeval_select(samples, 3)
        centroid = rows.mean(axis=0)
        a = pair.w_first.as_array()[:2]
        b = pair.w_second.as_array()[:2]
        normal = (a - b) / np.hypot(*(a - b))
        plane_distance = abs((centroid - (a + b) / 2) @ normal)
        assert plane_distance <= 1e-12
        assert pair.score == 1.0

    def test_matches_brute_force_oracle(self):
        for seed in range(4):
            samples = sample_uniform_simplex(50, np.random.default_rng(100 + seed))
            pair = probabilistic_qeval_select(samples, 10)
            (i, j), ratio = oracle_qeval(samples, 10)
            assert np.allclose(pair.w_first.as_array(), samples.samples[i])
            assert np.allclose(pair.w_second.as_array(), samples.samples[j])
            assert pair.score == pytest.approx(ratio, rel=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(8)
        samples = sample_uniform_simplex(60, rng)
        pair1 = probabilistic_qeval_select(samples, 10)
        shuffled = PosteriorSamples(samples.samples[rng.permutation(60)], 1.0)
        pair2 = probabilistic_qeval_select(shuffled, 10)
        got1 = {tuple(pair1.w_first.as_array()), tuple(pair1.w_second.as_array())}
        got2 = {tuple(pair2.w_first.as_array()), tuple(pair2.w_second.as_array())}
        assert got1 == got2

    @pytest.mark.parametrize(
        "probe_x, expected_score",
        [(0.40, 1.0), (0.40 + 5e-13, 1.0), (0.40 + 1e-9, 2.0 / 3.0)],
    )
    def test_on_plane_samples_count_toward_neither_side(self, probe_x, expected_score):
        # pair (A, B) bisects through the centroid along x = 0.40 with a unique
        # zero distance; the probe sits on (or just off) that plane
        rows = [
            [0.30, 0.40],  # A
            [0.50, 0.40],  # B
            [probe_x, 0.43],
            [0.34, 0.37],
            [0.46, 0.40],
        ]
        pair = probabilistic_qeval_select(as_samples(rows), 1)
        chosen = {tuple(pair.w_first.as_array()[:2]), tuple(pair.w_second.as_array()[:2])}
        assert chosen == {(0.30, 0.40), (0.50, 0.40)}
        assert pair.score == pytest.approx(expected_score, abs=1e-12)

    def test_coincident_pairs_skipped(self):
        rows = np.array([[0.3, 0.3], [0.3, 0.3], [0.2, 0.25], [0.4, 0.35]])
        pair = probabilistic_qeval_select(as_samples(rows), 50)
        assert pair.w_first != pair.w_second

    def test_all_coincident_rejected(self):
        samples = as_samples(np.tile([0.25, 0.25], (4, 1)))
        with pytest.raises(ValueError):
            probabilistic_qeval_select(samples, 5)

    def test_parameter_validation(self):
        samples = as_samples([[0.2, 0.2], [0.3, 0.3]])
        with pytest.raises(ValueError):
            probabilistic_qeval_select(samples, 0)
        with pytest.raises(ValueError):
            probabilistic_qeval_select(as_samples([[0.2, 0.2]]), 5)


class TestQueryPair:
    def test_rejects_equal_weights(self):
        w = RewardWeights(0.3, 0.3, 0.4)
        with pytest.raises(ValueError):
            QueryPair(w, RewardWeights(0.3, 0.3, 0.4), METHOD_MULTIOBJECTIVE, 0.0)
