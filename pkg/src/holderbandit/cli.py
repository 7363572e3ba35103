"""Command-line entry point: ``holderbandit {run,sweep,rate,compare}``.

Exit codes: 0 success, 2 configuration error, 3 slope outside ``--assert-slope``.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import harness
from .trace import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_THRESHOLD = 0, 2, 3


def _output(args, cfg_output: Optional[str], default: str) -> str:
    return args.output or cfg_output or default


def _cmd_run(args) -> int:
    cfg = harness.config_from_dict(harness.load_json(args.config))
    traces = harness.run_experiment(cfg, args.workers)
    path = _output(args, cfg.output, "trace.csv")
    harness.write_traces(traces, path)
    print(f"wrote {len(traces)} trace(s) to {path}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    raw = harness.load_json(args.config)
    cfgs = harness.expand_sweep(raw)
    rows = harness.summarize(harness.run_many(cfgs, args.workers))
    path = _output(args, raw.get("output"), "summary.csv")
    harness.write_summary(rows, path)
    print(f"wrote {len(rows)} row(s) to {path}")
    return EXIT_OK


def _parse_bounds(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"--assert-slope expects 'lo,hi', got {text!r}") from None
    return lo, hi


def _cmd_rate(args) -> int:
    bounds = _parse_bounds(args.assert_slope) if args.assert_slope else None
    try:
        rows = harness.read_csv(args.input)
    except FileNotFoundError:
        raise ConfigError(f"input {args.input} not found") from None
    keys = [k for k in args.group.split(",") if k] if args.group else []
    try:
        fits = harness.fit_groups(rows, keys)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    harness.write_fits(fits, args.output or sys.stdout, keys)
    status = EXIT_OK
    for group, fit in fits:
        if bounds and not (bounds[0] <= fit.slope <= bounds[1]):
            print(f"slope {fit.slope:.4f} for {group} outside [{bounds[0]}, {bounds[1]}]", file=sys.stderr)
            status = EXIT_THRESHOLD
    return status


def _cmd_compare(args) -> int:
    cfg = harness.config_from_dict(harness.load_json(args.config))
    comp, _ = harness.compare(cfg, args.workers)
    path = _output(args, cfg.output, "compare.csv")
    harness.write_comparison(comp, path)
    print(f"{cfg.algorithm}: {harness.slope_summary(comp.meta_fit)}")
    print(f"ucb1_bins: {harness.slope_summary(comp.baseline_fit)}")
    print(f"paired seeds with lower {cfg.algorithm} slope: {comp.paired_wins}/{len(comp.meta_seed_slopes)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holderbandit", description="Hölder-smooth bandit simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, func, help_text in [
        ("run", _cmd_run, "run one configuration and write per-step traces"),
        ("sweep", _cmd_sweep, "run a grid of configurations and write a final-regret summary"),
        ("compare", _cmd_compare, "paired slope comparison against the ucb1_bins baseline"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True)
        p.add_argument("--output")
        p.add_argument("--workers", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("rate", help="fit log-log regret slopes from a summary CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--group", default="algorithm,alpha_true,alpha_input,d")
    p.add_argument("--output")
    p.add_argument("--assert-slope", dest="assert_slope", metavar="LO,HI")
    p.set_defaults(func=_cmd_rate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
