"""Acceptance suite: runs every primary criterion at its stated tolerance.

Each criterion prints one [PASS]/[FAIL] line (run with ``pytest -s`` to see
them as they complete). The seeded session batches are shared across criteria
and run through the public experiment runner with parallel workers.
"""
import time

import numpy as np
import pytest

from prefland.config import ExperimentConfig
from prefland.experiments import run_batch
from prefland.iteration import SessionEngine, final_stochastic_model, simulated_response, SimulatedExpert
from prefland.landing import LandingState, RewardWeights
from prefland.mdp import greedy_policy, rollout, value_iteration
from prefland.preferences import adaptive_metropolis, sample_uniform_simplex

from conftest import brute_force_q, random_deterministic_mdp
from test_preferences import make_record, quadrature_stats
from test_queries import oracle_multiobjective, oracle_qeval

SEEDS = (0, 1, 2, 3, 4)
W_TRUE = (0.1, 0.8, 0.1)
WORKERS = 2
# weakly-decreasing checks allow this much adjacent inversion: the
# compared values are 5-trial means, so neighboring error rates whose true
# effects are close can swap order by sampling noise alone
ORDERING_SLACK = 0.01


def check(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def base_config(**kw):
    cfg = dict(max_iter=80, seed=0, w_true=W_TRUE, method="multiobjective")
    cfg.update(kw)
    return ExperimentConfig(**cfg)


def batch(**kw):
    tasks = [(base_config(seed=seed, **kw), None) for seed in SEEDS]
    return run_batch(tasks, workers=WORKERS)


def mean_curve(results):
    return np.mean([r.cosines for r in results], axis=0)


@pytest.fixture(scope="module")
def batch_multi():
    start = time.perf_counter()
    results = batch()
    elapsed = time.perf_counter() - start
    return results, elapsed


@pytest.fixture(scope="module")
def batch_qeval():
    return batch(method="probabilistic_qeval", max_iter=40)


@pytest.fixture(scope="module")
def batch_mu0():
    return batch(mu=0.0, max_iter=40)


@pytest.fixture(scope="module")
def batch_eps(batch_multi):
    curves = {0.0: mean_curve(batch_multi[0])}
    for eps in (0.1, 0.2, 0.3):
        curves[eps] = mean_curve(batch(epsilon=eps))
    return curves


def test_convergence_reproduction(batch_multi):
    results, elapsed = batch_multi
    curve = mean_curve(results)
    ok = curve[39] >= 0.95 and curve[19] >= 0.90 and elapsed < 20 * 60
    check(
        "convergence reproduction",
        ok,
        f"mean cosine at 20/40 = {curve[19]:.3f}/{curve[39]:.3f} "
        f"(needs >= 0.90/0.95); 5-session batch took {elapsed:.0f}s (< 1200s)",
    )


def test_method_comparison(batch_multi, batch_qeval):
    multi = mean_curve(batch_multi[0])
    qeval = mean_curve(batch_qeval)
    window = slice(4, 15)
    ok = (
        multi[39] >= 0.95
        and qeval[39] >= 0.95
        and multi[window].mean() >= qeval[window].mean()
    )
    check(
        "method comparison",
        ok,
        f"at-40 multi/qeval = {multi[39]:.3f}/{qeval[39]:.3f} (both >= 0.95); "
        f"query 5-15 means {multi[window].mean():.3f} >= {qeval[window].mean():.3f}",
    )


def test_mu_sensitivity(batch_multi, batch_mu0):
    tuned = mean_curve(batch_multi[0])[39]
    untuned = mean_curve(batch_mu0)[39]
    ok = tuned - untuned >= 0.05
    check(
        "mu sensitivity",
        ok,
        f"mean cosine at 40: mu=500 {tuned:.3f} vs mu=0 {untuned:.3f} "
        f"(gap {tuned - untuned:.3f} >= 0.05)",
    )


def test_error_robustness(batch_eps):
    finals = {eps: batch_eps[eps][79] for eps in (0.0, 0.1, 0.2, 0.3)}
    ordered = all(
        finals[a] >= finals[b] - ORDERING_SLACK
        for a, b in ((0.0, 0.1), (0.1, 0.2), (0.2, 0.3))
    )
    eps2_at40 = batch_eps[0.2][39]
    gap3 = finals[0.0] - finals[0.3]
    ok = ordered and eps2_at40 >= 0.90 and gap3 >= 0.05
    check(
        "error robustness",
        ok,
        "final cosine by eps "
        + " ".join(f"{eps}:{finals[eps]:.3f}" for eps in sorted(finals))
        + f"; eps=0.2 at 40 = {eps2_at40:.3f} (>= 0.90); "
        f"eps 0 vs 0.3 gap {gap3:.3f} (>= 0.05)",
    )


def test_query_latency(model):
    engine = SessionEngine(base_config(max_iter=5), model=model)
    expert = SimulatedExpert(RewardWeights.from_array(W_TRUE))
    times = []
    while not engine.done:
        bundle = engine.current_query()
        expert.rng = engine._rng(bundle.iteration, 2)
        metrics = engine.submit(simulated_response(expert, bundle, engine.model).response)
        times.append(metrics.wall_time_s)
    worst = max(times)
    check(
        "query latency",
        worst < 15.0,
        f"worst end-to-end query generation {worst:.2f}s over {len(times)} queries (< 15s)",
    )


def test_landing_invariant(model):
    rng = np.random.default_rng(2024)
    weights = sample_uniform_simplex(100, rng)
    grids = model.grids
    band = [
        LandingState(h, hd, xd, model.zero_action_index)
        for h in grids.h_values[-10:]
        for hd in (-8.0, 0.0)
        for xd in grids.x_dot_values[5:10]
    ]
    assert len(band) == 100
    failures = 0
    for row in weights.samples:
        policy = greedy_policy(model.solve(RewardWeights.from_array(row)))
        for state in band:
            traj = rollout(model.mdp, policy, model.state_index(state), 600)
            if not traj.landed:
                failures += 1
    check(
        "landing invariant",
        failures == 0,
        f"{failures} non-landing rollouts over 100 weight draws x {len(band)} "
        "approach-band states",
    )


def test_oracle_equivalence(model):
    # value iteration vs brute-force fixed point on small MDPs
    rng = np.random.default_rng(99)
    worst_vi = 0.0
    for n_states in (10, 25, 50):
        mdp, reward = random_deterministic_mdp(
            rng, n_states=n_states, n_actions=4, terminal_count=2
        )
        q = value_iteration(mdp, reward, tolerance=1e-12)
        oracle = brute_force_q(mdp, reward)
        worst_vi = max(worst_vi, float(np.abs(q.values - oracle).max()))
    vi_ok = worst_vi <= 1e-8

    # both selectors vs independent brute-force pair scans
    from prefland.queries import multiobjective_select, probabilistic_qeval_select

    pair_ok = True
    for m_count, seed in ((50, 0), (120, 1), (200, 2)):
        samples = sample_uniform_simplex(m_count, np.random.default_rng(seed))
        got = multiobjective_select(samples, 500.0)
        (i, j), _ = oracle_multiobjective(samples, 500.0)
        pair_ok &= np.allclose(got.w_first.as_array(), samples.samples[i])
        pair_ok &= np.allclose(got.w_second.as_array(), samples.samples[j])
        got = probabilistic_qeval_select(samples, 5)
        (i, j), _ = oracle_qeval(samples, 5)
        pair_ok &= np.allclose(got.w_first.as_array(), samples.samples[i])
        pair_ok &= np.allclose(got.w_second.as_array(), samples.samples[j])

    # MCMC marginal means vs grid quadrature on small record suites
    records = [
        make_record(model, seed=10),
        make_record(model, (0.01, 0.98, 0.01), (0.49, 0.02, 0.49), response=-1, seed=11),
        make_record(model, (0.01, 0.49, 0.5), (0.98, 0.01, 0.01), response=1, seed=12),
        make_record(model, (0.2, 0.6, 0.2), (0.6, 0.2, 0.2), response=1, seed=13),
        make_record(model, (0.01, 0.01, 0.98), (0.33, 0.34, 0.33), response=-1, seed=14),
    ]
    worst_mcmc = 0.0
    for n in (1, 3, 5):
        suite = records[:n]
        samples = adaptive_metropolis(suite, 5000, np.random.default_rng(50 + n), model)
        (qa, qb), _, _, _ = quadrature_stats(suite, model)
        mean = samples.samples.mean(axis=0)
        worst_mcmc = max(worst_mcmc, abs(mean[0] - qa), abs(mean[1] - qb))
    mcmc_ok = worst_mcmc <= 0.03

    check(
        "oracle equivalence",
        vi_ok and pair_ok and mcmc_ok,
        f"VI sup-norm {worst_vi:.2e} (<= 1e-8); selector pairs exact match "
        f"{'yes' if pair_ok else 'no'}; MCMC vs quadrature l-inf {worst_mcmc:.3f} (<= 0.03)",
    )


def test_posterior_concentration(batch_multi):
    # both clauses are per-trial conditions; the criterion's trailing
    # "in >= 4 of 5 seeded trials" quantifies the conjunction
    results, _ = batch_multi
    target = np.array(W_TRUE[:2])
    checkpoints = (1, 9, 19, 79)
    distances = []
    near_trials = 0
    monotone_trials = 0
    for r in results:
        est = np.array(r.estimates[79][:2])
        distances.append(np.linalg.norm(est - target))
        if distances[-1] <= 0.08:
            near_trials += 1
        stds = np.array([r.posterior_stds[i] for i in checkpoints])
        if np.all(np.diff(stds, axis=0) < 0):
            monotone_trials += 1
    ok = near_trials >= 4 and monotone_trials >= 4
    check(
        "posterior concentration",
        ok,
        f"estimate within 0.08 of target in (alpha, beta) in {near_trials}/5 trials "
        f"(distances {', '.join(f'{d:.3f}' for d in distances)}); "
        f"std shrinks across 2/10/20/80 in {monotone_trials}/5 trials (both >= 4)",
    )


def test_monotone_learning_invariant(batch_multi):
    # with a noiseless expert the 5-session mean cosine, smoothed over
    # 10-query windows, never regresses (beyond float-level wiggle at the
    # plateau)
    curve = mean_curve(batch_multi[0])
    smoothed = np.convolve(curve, np.ones(10) / 10, mode="valid")
    assert np.all(np.diff(smoothed) >= -5e-3), smoothed


def test_lambda_dispersion(model):
    start = LandingState(450.0, -8.0, 30.0, model.zero_action_index)
    w = RewardWeights.from_array(W_TRUE)
    dispersions = []
    for lam in (0.003, 0.01, 0.03):
        trajs = final_stochastic_model(
            w, lam, 20, np.random.default_rng(7), model, initial_state=start
        )
        profiles = [[model.state_at(s).h for s in t.states] for t in trajs]
        longest = max(len(p) for p in profiles)
        padded = np.array([p + [p[-1]] * (longest - len(p)) for p in profiles])
        total, count = 0.0, 0
        for i in range(len(padded)):
            for j in range(i + 1, len(padded)):
                total += np.abs(padded[i] - padded[j]).mean()
                count += 1
        dispersions.append(total / count)
    ok = dispersions[0] > dispersions[1] > dispersions[2]
    check(
        "lambda dispersion",
        ok,
        "mean pairwise altitude-profile distance at precisions 0.003/0.01/0.03 = "
        + "/".join(f"{d:.1f}" for d in dispersions)
        + " (strictly decreasing)",
    )
