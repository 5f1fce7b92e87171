"""Command line front end.

Subcommands:

* ``run``           — execute an experiment config, write CSV and SVG per run
* ``sweep``         — repeat a config over parameter values, write summary.csv
* ``bench-runtime`` — wall-clock per-decision timing of the agent kinds
* ``opcount``       — analytic per-slot multiply counts and their ratio

Exit codes: 0 success, 1 configuration problem, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from typing import List, Optional

import numpy as np

from dsalab import harness, report
from dsalab.env import PatternSpec
from dsalab.harness import (
    ExperimentConfig,
    average_reward,
    evaluation_range,
    load_config,
    measure_decision_time,
    outcome_distribution,
    run as run_experiment,
    standard_op_counts,
    window_averages,
)


class ConfigError(Exception):
    """A problem with arguments or config files (exit code 1)."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsalab",
        description="Dynamic multichannel access experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("--config", required=True, help="experiment JSON file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.add_argument("--replicas", type=int, default=1,
                       help="independent repeats with consecutive seeds")

    p_sweep = sub.add_parser("sweep", help="repeat a config over a parameter")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--param", required=True,
                         help="swept parameter (switch_prob)")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values, e.g. 0.75,0.80,0.85")
    p_sweep.add_argument("--seed", type=int, default=None)

    p_bench = sub.add_parser("bench-runtime",
                             help="per-decision wall-clock comparison")
    p_bench.add_argument("--channels", default="16,32,64",
                         help="comma-separated channel counts")
    p_bench.add_argument("--trials", type=int, default=300)
    p_bench.add_argument("--out", default=None,
                         help="optional directory for runtime.csv")

    p_ops = sub.add_parser("opcount", help="analytic multiply counts")
    p_ops.add_argument("--minibatch", type=int, default=32)
    p_ops.add_argument("--channels", type=int, default=16)
    p_ops.add_argument("--omega", type=int, default=16)
    p_ops.add_argument("--hidden", type=int, default=200)

    return parser


def _ensure_dir(path: str) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}")


def _load(path: str) -> ExperimentConfig:
    try:
        return load_config(path)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except (ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}")


def _run_one(config: ExperimentConfig, out_dir: str, tag: str) -> List[float]:
    """Run one config; write CSV + SVG; return per-user final averages."""
    log = run_experiment(config)
    report.export_csv(log, os.path.join(out_dir, f"run_{tag}.csv"))
    w = config.window
    series = []
    for u in range(log.num_users):
        curve = window_averages(log, user=u)
        x = (np.arange(curve.shape[0]) + 1) * w
        series.append((f"user {u} ({config.users[u].policy})", x, curve))
    report.render_svg(series, os.path.join(out_dir, f"curve_{tag}.svg"),
                      title=config.label or f"run {tag}",
                      xlabel="slot", ylabel=f"reward ({w}-slot window)")
    lo, hi = evaluation_range(log)
    return [average_reward(log, (lo, hi), user=u) for u in range(log.num_users)]


def _cmd_run(args) -> int:
    base = _load(args.config)
    if args.replicas < 1:
        raise ConfigError("--replicas must be at least 1")
    _ensure_dir(args.out)
    seed0 = base.seed if args.seed is None else args.seed
    for r in range(args.replicas):
        config = replace(base, seed=seed0 + r)
        finals = _run_one(config, args.out, f"seed{config.seed}")
        for u, avg in enumerate(finals):
            print(f"seed={config.seed} user={u} ({config.users[u].policy}) "
                  f"final-20% avg reward {avg:+.4f}")
    return 0


def _cmd_sweep(args) -> int:
    base = _load(args.config)
    if args.param != "switch_prob":
        raise ConfigError(f"unsupported sweep parameter {args.param!r} "
                          "(supported: switch_prob)")
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --values list: {exc}")
    if not values:
        raise ConfigError("--values is empty")
    _ensure_dir(args.out)
    if args.seed is not None:
        base = replace(base, seed=args.seed)

    rows = []
    curves = []
    for value in values:
        pattern = PatternSpec(base.pattern.num_channels, base.pattern.states,
                              value, base.pattern.label)
        pattern_b = (PatternSpec(base.pattern_b.num_channels, base.pattern_b.states,
                                 value, base.pattern_b.label)
                     if base.pattern_b is not None else None)
        config = replace(base, pattern=pattern, pattern_b=pattern_b)
        tag = f"p{value:g}"
        finals = _run_one(config, args.out, tag)
        log_avg = float(np.mean(finals))
        for u, avg in enumerate(finals):
            rows.append((args.param, value, config.seed, u, avg))
            print(f"{args.param}={value:g} user={u} final-20% avg {avg:+.4f}")
        curves.append((f"p={value:g}", [0], [log_avg]))

    with open(os.path.join(args.out, "summary.csv"), "w", newline="") as fh:
        fh.write("param,value,seed,user,final_avg_reward\n")
        for param, value, seed, user, avg in rows:
            fh.write(f"{param},{value:g},{seed},{user},{avg:.6f}\n")

    xs = [r[1] for r in rows]
    ys = [r[4] for r in rows]
    report.render_svg([("final-20% average", xs, ys)],
                      os.path.join(args.out, "sweep.svg"),
                      title=f"sweep over {args.param}",
                      xlabel=args.param, ylabel="final average reward")
    return 0


def _cmd_bench(args) -> int:
    try:
        channels = [int(c) for c in args.channels.split(",") if c.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --channels list: {exc}")
    if not channels or any(c < 2 for c in channels):
        raise ConfigError("--channels needs integers >= 2")
    if args.trials < 1:
        raise ConfigError("--trials must be positive")

    rows = []
    print(f"{'N':>4}  {'ac s/decision':>14}  {'dqn s/decision':>15}  {'reduction':>9}")
    for n in channels:
        t_ac = measure_decision_time("ac", n, args.trials)
        t_dqn = measure_decision_time("dqn", n, args.trials)
        cut = 100.0 * (1.0 - t_ac / t_dqn)
        rows.append((n, t_ac, t_dqn, cut))
        print(f"{n:>4}  {t_ac:>14.6f}  {t_dqn:>15.6f}  {cut:>8.2f}%")
    if args.out:
        _ensure_dir(args.out)
        with open(os.path.join(args.out, "runtime.csv"), "w", newline="") as fh:
            fh.write("channels,ac_seconds,dqn_seconds,reduction_percent\n")
            for n, t_ac, t_dqn, cut in rows:
                fh.write(f"{n},{t_ac:.6f},{t_dqn:.6f},{cut:.2f}\n")
    return 0


def _cmd_opcount(args) -> int:
    if args.minibatch < 1 or args.channels < 2 or args.omega < 1 or args.hidden < 1:
        raise ConfigError("opcount arguments must be positive (channels >= 2)")
    ac_ops, dqn_ops, ratio = standard_op_counts(
        args.channels, omega=args.omega, hidden=args.hidden,
        minibatch=args.minibatch)
    print(f"input width K = {args.channels * args.omega}")
    print(f"actor+2*critic multiplies per slot: {ac_ops}")
    print(f"dqn minibatch multiplies per slot:  {dqn_ops}")
    print(f"ratio ac/dqn: {ratio:.6f} (compare 3/M = {3.0 / args.minibatch:.6f})")
    return 0


_HANDLERS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "bench-runtime": _cmd_bench,
    "opcount": _cmd_opcount,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; fold that into "config error"
        return 0 if exc.code == 0 else 1
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:   # runtime failures: I/O mid-run, agent errors
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
