"""Command-line front end: single runs, Monte Carlo batches, config dumps."""

from __future__ import annotations

import argparse
import sys

from rfvlc.config import ConfigError, dump_config, load_config
from rfvlc.harness import (
    ALGORITHMS,
    run_episode,
    run_monte_carlo,
    write_episode_csv,
    write_summary_csv,
)


def _parse_targets(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in raw.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad target list: {raw!r}")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument(
        "--algorithm", choices=ALGORITHMS, default="dqn", help="learner family"
    )
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument(
        "--targets",
        type=_parse_targets,
        help="fixed per-user target rates in Mbps, e.g. 20,12",
    )
    parser.add_argument(
        "--frozen-channel",
        action="store_true",
        help="hold radio shadowing and fading at their means",
    )
    parser.add_argument("--out", help="write results to this CSV file")


def _load(args) -> "ExperimentConfig":
    overrides = {}
    if args.targets is not None:
        overrides["targets_mbps"] = args.targets
        overrides["n_users"] = len(args.targets)
    return load_config(args.config, overrides)


def _cmd_run(args) -> int:
    cfg = _load(args)
    record = run_episode(cfg, args.algorithm, args.seed, frozen_channel=args.frozen_channel)
    if record.converged:
        print(f"converged at iteration {record.convergence_iteration}")
    else:
        print(f"did not converge within {cfg.max_iterations} iterations")
    targets = ",".join(f"{t:.3f}" for t in record.targets_mbps)
    print(f"targets_mbps={targets} wall_time_s={record.wall_time_s:.2f}")
    if args.out:
        write_episode_csv(record, args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_montecarlo(args) -> int:
    cfg = _load(args)
    summary = run_monte_carlo(
        cfg,
        args.algorithm,
        args.runs,
        args.seed,
        frozen_channel=args.frozen_channel,
        workers=args.workers,
    )
    print(f"runs={args.runs} converged={sum(summary.converged)} "
          f"rate={summary.convergence_rate:.3f}")
    if summary.median_iterations is not None:
        print(f"median_iterations={summary.median_iterations:.1f}")
    if args.out:
        write_summary_csv(summary, args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_dump_config(args) -> int:
    cfg = load_config(args.config)
    sys.stdout.write(dump_config(cfg))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfvlc",
        description="Multi-agent transmit-power allocation in a hybrid "
        "radio/optical indoor network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="train a single episode")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_mc = sub.add_parser("montecarlo", help="run a seeded batch of episodes")
    _add_common(p_mc)
    p_mc.add_argument("--runs", type=int, default=20, help="number of episodes")
    p_mc.add_argument("--workers", type=int, default=1, help="parallel processes")
    p_mc.set_defaults(func=_cmd_montecarlo)

    p_dump = sub.add_parser("dump-config", help="print the resolved configuration")
    p_dump.add_argument("--config", help="path to a key = value config file")
    p_dump.set_defaults(func=_cmd_dump_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
