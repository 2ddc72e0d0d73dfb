"""Command-line entry point.

Subcommands: prepare | evolve | compare-fig2 | compare-fig3 | scan-alpha.
Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure.

--threads must act before numpy initializes its thread pools, so the heavy
modules are imported only after the environment is set.
"""

import argparse
import json
import os
import sys


def _parser():
    p = argparse.ArgumentParser(
        prog="tdqmc",
        description="Time-dependent quantum Monte Carlo for a 1D soft-core "
                    "two-electron atom, with an exact two-body oracle.")
    p.add_argument("command", choices=["prepare", "evolve", "compare-fig2",
                                       "compare-fig3", "scan-alpha"])
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--seed", type=int, default=None, help="override the seed")
    p.add_argument("--threads", type=int, default=None,
                   help="BLAS/OpenMP thread count (recorded in outputs)")
    p.add_argument("--out", default=None, help="override the output directory")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)

    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)

    from dataclasses import replace

    from .config import load_config
    from .errors import ParseError, TDQMCError, ValidationError
    from .scenarios import run_scenario

    try:
        cfg = load_config(args.config)
        if cfg.mode != args.command:
            raise ValidationError("mode", f"config says {cfg.mode!r} but the "
                                          f"command is {args.command!r}")
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, output_dir=args.out)
        if args.threads is not None:
            cfg = replace(cfg, threads=args.threads)
    except (ParseError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        summary = run_scenario(cfg)
    except TDQMCError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
