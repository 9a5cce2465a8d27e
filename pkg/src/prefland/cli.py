"""Command-line entry points: run, sample, serve, and resume."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .exports import trajectory_rows, write_metrics_csv, write_trajectories_csv
from .iteration import final_stochastic_model
from .landing import LandingState, RewardWeights, cached_model
from .plots import convergence_figure, trajectory_figure
from .experiments import SessionResult, finish_session, run_batch
from .session import load_session


def _parse_triple(text: str) -> tuple[float, float, float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ConfigError(f"expected three comma-separated values, got {text!r}")
    return tuple(float(p) for p in parts)


def _session_filename(config: ExperimentConfig) -> str:
    knob = f"mu{config.mu:g}" if config.method == "multiobjective" else f"k{config.k}"
    return f"session-{config.method}-{knob}-eps{config.epsilon:g}-seed{config.seed}.jsonl"


def _add_common_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="flat key=value config file")
    p.add_argument("--method", choices=("multiobjective", "probabilistic_qeval", "qeval"))
    p.add_argument("--k", type=int, help="candidate hyperplanes for probabilistic_qeval")
    p.add_argument("--samples", type=int, dest="sample_count", help="MCMC samples per update")
    p.add_argument("--max-iter", type=int, dest="max_iter", help="number of queries")
    p.add_argument("--seed", type=int, help="base random seed")
    p.add_argument("--rollouts", type=int, dest="rollouts_per_query",
                   help="rollouts per policy per query")
    p.add_argument("--time-step", type=float, dest="time_step")
    p.add_argument("--precision", type=float, help="softmax precision for the final model")


def _base_config(args, **extra) -> ExperimentConfig:
    overrides = dict(
        method=args.method,
        k=args.k,
        sample_count=args.sample_count,
        max_iter=args.max_iter,
        seed=args.seed,
        rollouts_per_query=args.rollouts_per_query,
        time_step=args.time_step,
        precision=args.precision,
    )
    overrides.update(extra)
    return load_config(args.config, **overrides)


def _write_run_outputs(out: Path, results: list[SessionResult]) -> None:
    rows = [row for res in results for row in res.metric_rows()]
    write_metrics_csv(out / "metrics.csv", rows)
    convergence_figure(rows, out / "convergence.png")
    weights = {
        "sessions": [
            {
                "seed": r.seed,
                "method": r.method,
                "mu_or_k": r.mu_or_k,
                "epsilon": r.epsilon,
                "final_estimate": list(r.final_estimate),
            }
            for r in results
        ],
        "mean_final_estimate": np.mean(
            [r.final_estimate for r in results], axis=0
        ).tolist(),
    }
    (out / "final_weights.json").write_text(json.dumps(weights, indent=2) + "\n")


def cmd_run(args) -> int:
    base = _base_config(
        args, w_true=_parse_triple(args.w_true) if args.w_true else None
    )
    base.require_w_true()
    mu_values = args.mu if args.mu else [base.mu]
    eps_values = args.epsilon if args.epsilon else [base.epsilon]
    out = Path(args.out)
    sessions_dir = out / "sessions"
    sessions_dir.mkdir(parents=True, exist_ok=True)
    tasks = []
    for mu in mu_values:
        for eps in eps_values:
            for trial in range(args.trials):
                config = base.replace(mu=mu, epsilon=eps, seed=base.seed + trial)
                tasks.append((config, str(sessions_dir / _session_filename(config))))
    print(f"running {len(tasks)} session(s) "
          f"({len(mu_values)} mu x {len(eps_values)} epsilon x {args.trials} trial(s))")
    results = run_batch(tasks, workers=args.workers)
    _write_run_outputs(out, results)
    for r in results:
        final = r.cosines[-1] if r.cosines else float("nan")
        print(f"  seed {r.seed} mu_or_k={r.mu_or_k:g} eps={r.epsilon:g}: "
              f"final cosine {final:.4f}")
    print(f"wrote {out / 'metrics.csv'}, {out / 'convergence.png'}, "
          f"{out / 'final_weights.json'}")
    return 0


def cmd_sample(args) -> int:
    config = _base_config(args)
    if args.from_session:
        loaded = load_session(args.from_session)
        if loaded.footer is None:
            raise ConfigError(f"{args.from_session} has no posterior yet")
        weights = RewardWeights.from_array(loaded.footer["estimate"])
    elif args.weights:
        weights = RewardWeights.from_array(_parse_triple(args.weights))
    else:
        raise ConfigError("sample requires --weights or --from-session")
    model = cached_model(
        config.grid_config(), time_step=config.time_step, discount=config.discount
    )
    initial = None
    if args.initial_state:
        h, h_dot, x_dot = _parse_triple(args.initial_state)
        initial = LandingState(h, h_dot, x_dot, model.zero_action_index)
    rng = np.random.default_rng(config.seed)
    trajectories = []
    if args.count > 0:
        trajectories = final_stochastic_model(
            weights,
            config.precision,
            args.count,
            rng,
            model,
            initial_state=initial,
            tolerance=config.vi_tolerance,
            max_steps=config.max_steps,
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = trajectory_rows(trajectories, model)
    write_trajectories_csv(out / "trajectories.csv", rows)
    trajectory_figure(rows, out / "trajectories.png")
    print(f"wrote {len(rows)} rows for {len(trajectories)} trajectories to "
          f"{out / 'trajectories.csv'}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _base_config(args)
    config.require_live()
    app = create_app(config, session_path=args.session)
    print(f"serving elicitation session on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_resume(args) -> int:
    loaded = load_session(args.session)
    if loaded.config.w_true is None:
        raise ConfigError(
            "live sessions resume under 'serve --session'; "
            "'resume' completes simulated runs"
        )
    result = finish_session(args.session)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_run_outputs(out, [result])
    print(f"session complete at iteration {len(result.cosines)}; "
          f"final cosine {result.cosines[-1]:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prefland",
        description="Preference-based reward learning for landing trajectory models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run simulated-expert experiment sessions")
    _add_common_config_flags(p_run)
    p_run.add_argument("--mu", type=float, nargs="*", default=None,
                       help="multiobjective trade-off value(s); a sweep if several")
    p_run.add_argument("--epsilon", type=float, nargs="*", default=None,
                       help="simulated expert error rate(s); a sweep if several")
    p_run.add_argument("--trials", type=int, default=1,
                       help="seeded trials per sweep point (seeds seed..seed+trials-1)")
    p_run.add_argument("--w-true", dest="w_true", help="hidden true weights 'a,b,c'")
    p_run.add_argument("--workers", type=int, default=None,
                       help="parallel session workers (default: cpu count)")
    p_run.add_argument("--out", default="results", help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_sample = sub.add_parser("sample", help="export trajectories from a learned model")
    _add_common_config_flags(p_sample)
    p_sample.add_argument("--weights", help="reward weights 'a,b,c'")
    p_sample.add_argument("--from-session", dest="from_session", type=Path,
                          help="take weights from a session file's posterior")
    p_sample.add_argument("--count", type=int, default=20, help="trajectories to sample")
    p_sample.add_argument("--initial-state", dest="initial_state",
                          help="fixed initial state 'h,h_dot,x_dot' (default: sampled)")
    p_sample.add_argument("--out", default="model_export", help="output directory")
    p_sample.set_defaults(func=cmd_sample)

    p_serve = sub.add_parser("serve", help="serve the live elicitation API")
    _add_common_config_flags(p_serve)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--session", type=Path, default=None,
                         help="session file to persist to (resumed if it exists)")
    p_serve.set_defaults(func=cmd_serve)

    p_resume = sub.add_parser("resume", help="complete an interrupted simulated session")
    p_resume.add_argument("--session", type=Path, required=True)
    p_resume.add_argument("--out", default="results", help="output directory")
    p_resume.set_defaults(func=cmd_resume)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
