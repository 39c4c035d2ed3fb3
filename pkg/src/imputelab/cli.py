"""Command-line entry point.

imputelab run --config FILE [--seed N] [--iterates N] [--out DIR]
              [--max-rows N]
imputelab validate --config FILE

Exit codes: 0 success, 2 configuration error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import ConfigError, config_echo, parse_config, run_to_directory


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imputelab",
        description="Run imputation-accuracy and prediction-interval experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment and write results")
    run_p.add_argument("--config", required=True, help="experiment config file")
    run_p.add_argument("--seed", type=int, default=None, help="override master_seed")
    run_p.add_argument(
        "--iterates", type=int, default=None, help="override mc_iterates"
    )
    run_p.add_argument("--out", default=None, help="override output directory")
    run_p.add_argument(
        "--max-rows", type=int, default=None, help="cap CSV ingestion row count"
    )
    val_p = sub.add_parser("validate", help="parse and validate a config file")
    val_p.add_argument("--config", required=True, help="experiment config file")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = parse_config(args.config)
        if args.command == "run":
            if args.seed is not None:
                config = replace(config, master_seed=args.seed)
            if args.iterates is not None:
                if args.iterates < 1:
                    raise ConfigError("--iterates must be >= 1")
                config = replace(config, mc_iterates=args.iterates)
            if args.max_rows is not None:
                if config.data_source != "file":
                    raise ConfigError("--max-rows only applies to [data] file sources")
                if args.max_rows < 1:
                    raise ConfigError("--max-rows must be >= 1")
                config = replace(
                    config, data={**config.data, "max_rows": args.max_rows}
                )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"{args.config}: OK ({config.kind})")
        print(config_echo(config), end="")
        return 0

    try:
        out_dir = run_to_directory(config, out_dir=args.out)
    except Exception as exc:  # runtime failures map to exit code 1
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote results.csv, manifest.txt, timings.csv to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
