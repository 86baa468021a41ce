"""Command-line entry points.

Subcommands: train, eval, encode-bench, robustness, report. Every run is a
pure function of its configuration and seed; outputs are metric JSONL files,
parameter snapshots, and CSV reports under --out.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .env import ContractError, FactoryConfig, PrecisionSchedule, ScenarioError
from .harness import ConfigFileError, ExperimentConfig, ReportError


def _add_common(parser):
    parser.add_argument("--config", type=str, default=None, help="experiment config JSON")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    parser.add_argument("--out", type=str, default=None, help="output directory")


def cmd_train(args) -> int:
    config = ExperimentConfig.load(args.config, args.scheme, args.seed, args.out)
    written = harness.run_experiment(config)
    for path in written:
        print(path)
    return 0


def cmd_eval(args) -> int:
    env_config = None
    if args.config is not None:
        env_config = ExperimentConfig.load(args.config).env
    records = harness.evaluate_snapshot(
        args.snapshot, args.episodes, args.seed if args.seed is not None else 0, env_config
    )
    out_dir = Path(args.out if args.out is not None else ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"eval-{Path(args.snapshot).stem}.jsonl"
    harness.write_metrics(path, records)
    print(path)
    return 0


def cmd_encode_bench(args) -> int:
    base = args.seed if args.seed is not None else 0
    rows = harness.encoding_benchmark(
        parameter_budget=args.budget,
        iterations=args.iterations,
        seeds=tuple(range(base, base + args.num_seeds)),
    )
    out_dir = Path(args.out if args.out is not None else ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "encoding-benchmark.csv"
    harness.write_csv(path, rows)
    for row in rows:
        print(f"{row['scheme']} seed={row['seed']} mse={row['mse']:.6f}")
    print(path)
    return 0


def cmd_robustness(args) -> int:
    schedule = PrecisionSchedule.from_file(args.scenario)
    seed = args.seed if args.seed is not None else 0
    if args.snapshot is not None:
        _, env_config, actor, _ = harness.load_snapshot(args.snapshot)
        if args.config is not None:
            env_config = ExperimentConfig.load(args.config).env
    else:
        config = ExperimentConfig.load(args.config)
        env_config = config.env
        import numpy as np

        actor, _ = harness.build_agents(
            config.scheme, env_config, config.train, np.random.default_rng(seed)
        )
    series = harness.robustness_scenario(
        env_config, schedule, actor, iterations=args.iterations, seed=seed
    )
    out_dir = Path(args.out if args.out is not None else ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "robustness.csv"
    harness.write_csv(path, series)
    print(path)
    return 0


def cmd_report(args) -> int:
    rows = harness.aggregate_report(args.metrics)
    summary = harness.summary_table(args.metrics)
    out_dir = Path(args.out if args.out is not None else ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.csv"
    summary_path = out_dir / "summary.csv"
    harness.write_csv(report_path, rows)
    harness.write_csv(summary_path, summary)
    for row in summary:
        cells = "  ".join(f"{k}={v:.3f}" for k, v in row.items() if k != "scheme")
        print(f"{row['scheme']}: {cells}")
    print(report_path)
    print(summary_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfleet",
        description="Quantum multi-agent actor-critic experiments for factory robot fleets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a scheme and write metrics + snapshot")
    _add_common(p)
    p.add_argument("--scheme", type=str, default=None, choices=harness.SCHEMES)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="greedy evaluation of a saved snapshot")
    _add_common(p)
    p.add_argument("--snapshot", type=str, required=True)
    p.add_argument("--episodes", type=int, default=100)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("encode-bench", help="state-encoding regression benchmark")
    _add_common(p)
    p.add_argument("--budget", type=int, default=50)
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--num-seeds", type=int, default=5)
    p.set_defaults(func=cmd_encode_bench)

    p = sub.add_parser("robustness", help="phased-precision robustness study")
    _add_common(p)
    p.add_argument("--scenario", type=str, required=True)
    p.add_argument("--snapshot", type=str, default=None)
    p.add_argument("--iterations", type=int, default=100)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("report", help="aggregate metric files into CSV tables")
    p.add_argument("metrics", nargs="+", help="metrics JSONL files")
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigFileError, ScenarioError, ContractError, ReportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
