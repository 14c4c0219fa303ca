"""Command-line entry point.

    qclt <experiment> --q 1009,10007 [--family primitive|all] [--t 0.0]
         [--method truncated|smoothed] [--X 100] [--Y 20] [--W 3]
         [--k1 N] [--k2 N] [--support-cap N] [--floor 1e-12]
         [--normalization paper|empirical] [--out DIR] [--seed N]
         [--max-chars N] [--formats csv,jsonl,svg] [--config FILE.json]

A JSON config file mirrors ExperimentConfig field names; explicit flags
override file values.  Exit codes: 0 success, 2 config error, 3 partial
failure (some q failed), 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import EXPERIMENTS, ConfigError, ExperimentConfig, run_experiment
from .outputs import emit_outputs

_NORM_WORDS = {"paper": "paper_scale", "empirical": "empirical_scale"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qclt",
        description="family experiments for Dirichlet L-values mod q",
    )
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--q", help="comma-separated moduli, e.g. 1009,10007")
    p.add_argument("--config", help="JSON config file (flags override it)")
    p.add_argument("--family", choices=["primitive", "all"])
    p.add_argument("--t", type=float)
    p.add_argument("--method", choices=["truncated", "smoothed"])
    p.add_argument("--X", type=int)
    p.add_argument("--Y", type=int)
    p.add_argument("--W", type=float)
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int)
    p.add_argument("--support-cap", type=int, dest="support_cap")
    p.add_argument("--floor", type=float)
    p.add_argument("--normalization", choices=["paper", "empirical"])
    p.add_argument("--out", dest="out_dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-chars", type=int, dest="max_chars")
    p.add_argument("--formats", help="comma subset of csv,jsonl,svg")
    p.add_argument("--window-T", type=float, dest="window_T")
    p.add_argument("--nodes", type=int, dest="quad_nodes")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    merged: dict = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                merged.update(json.load(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config file {args.config}: {exc}") from exc
    merged["experiment"] = args.experiment
    if args.q is not None:
        try:
            merged["q_list"] = [int(part) for part in args.q.split(",") if part]
        except ValueError as exc:
            raise ConfigError(f"bad --q list {args.q!r}") from exc
    if args.formats is not None:
        merged["formats"] = [part for part in args.formats.split(",") if part]
    if args.normalization is not None:
        merged["normalization"] = _NORM_WORDS[args.normalization]
    for name in (
        "family", "t", "method", "X", "Y", "W", "k1", "k2", "support_cap",
        "floor", "out_dir", "seed", "max_chars", "window_T", "quad_nodes",
    ):
        v = getattr(args, name, None)
        if v is not None:
            merged["K1" if name == "k1" else "K2" if name == "k2" else name] = v
    if "q_list" not in merged:
        raise ConfigError("no moduli given: pass --q or a config file with q_list")
    try:
        config = ExperimentConfig.from_dict(merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        record = run_experiment(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        paths = emit_outputs(record)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    for path in paths:
        print(path)
    print(
        f"{config.experiment}: {len(record.results)} q done, "
        f"{len(record.errors)} failed, {record.wall_time_s:.2f}s",
        file=sys.stderr,
    )
    if record.errors:
        for q, msg in record.errors.items():
            print(f"  q={q}: {msg}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
