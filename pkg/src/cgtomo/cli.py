"""Command-line entry point: ``cgtomo {fig2c,fig3,fig4,fig5,custom,selftest}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .errors import ConfigError
from .experiments import Experiment, SweepConfig, run_sweep, write_outputs
from .mle import MleConfig

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cgtomo", description="Coarse-grained homodyne tomography sweeps.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in [e.value for e in Experiment]:
        sp = sub.add_parser(name, help=f"run the {name} sweep")
        sp.add_argument("--config", help="JSON file with SweepConfig keys")
        sp.add_argument("--out", help="output directory (overrides out_dir)")
        sp.add_argument("--seed", type=int, help="RNG seed (overrides seed)")
        sp.add_argument("--threads", type=int, help="concurrent sweep cells (overrides threads)")
        sp.add_argument("--precise", action="store_true", help="full-accuracy MLE (8 restarts)")
    sub.add_parser("selftest", help="run the oracle suites and invariants")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _config(args) -> SweepConfig:
    if args.config:
        cfg = SweepConfig.from_json(args.config, experiment=args.command)
    else:
        cfg = SweepConfig.for_experiment(args.command)
    if args.out is not None:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    if args.precise:
        cfg.mle = dataclasses.replace(cfg.mle, restarts=MleConfig().restarts)
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "selftest":
        from .selftest import self_test

        return EXIT_OK if all(r.passed for r in self_test()) else EXIT_NUMERICAL
    try:
        cfg = _config(args)
        records = run_sweep(cfg)
        paths = write_outputs(cfg, records)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, ValueError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in paths:
        print(path)
    failed = sum(1 for r in records if r.error)
    if failed:
        print(f"{failed} of {len(records)} cells failed; see the error column", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
