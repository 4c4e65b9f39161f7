"""Command-line front end.

    transduce run <name> [--config PATH] [--out DIR] [--seed N]
    transduce sweep <name> --axis PARAM --grid SPEC [...]
    transduce validate --config PATH

Exit status: 0 when every summary row passes its tolerance (and for
successful sweeps/validations), 1 when any row fails or the config is
invalid, 2 for usage errors.  Worker count comes from --workers or the
TRANSDUCE_WORKERS environment variable.
"""
import argparse
import os
import sys

import numpy as np

from .config import ConfigError, load_config
from .experiments import (DEFAULT_SEED, SweepAxisError,
                          UnknownExperimentError, run_experiment, run_sweep)

USAGE_EXIT = 2


def _worker_count(args):
    if args.workers is not None:
        return max(1, args.workers)
    env = os.environ.get("TRANSDUCE_WORKERS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def parse_grid(spec):
    """Parse a sweep grid specification.

    Accepted forms: "lo:hi:n" (linear, inclusive), "log:lo:hi:n"
    (logarithmic), a comma list "1e5,7.5e5,1e7", a single number, or an
    empty string for an empty grid.
    """
    spec = spec.strip()
    if not spec:
        return []
    if spec.startswith("log:"):
        parts = spec[4:].split(":")
        if len(parts) != 3:
            raise ValueError(f"bad log grid {spec!r}; want log:lo:hi:n")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1 or lo <= 0 or hi <= 0:
            raise ValueError(f"bad log grid {spec!r}")
        return list(np.geomspace(lo, hi, n))
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad grid {spec!r}; want lo:hi:n")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise ValueError(f"bad grid {spec!r}")
        return list(np.linspace(lo, hi, n))
    return [float(tok) for tok in spec.split(",") if tok.strip()]


def build_parser():
    p = argparse.ArgumentParser(
        prog="transduce",
        description="microwave-to-optical transduction analysis engine")
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a bundled experiment")
    run_p.add_argument("name")
    run_p.add_argument("--config", default=None)
    run_p.add_argument("--out", default="transduce_out")
    run_p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    run_p.add_argument("--workers", type=int, default=None)

    sweep_p = sub.add_parser("sweep", help="sweep one numeric config field")
    sweep_p.add_argument("name")
    sweep_p.add_argument("--axis", required=True,
                         help="dotted config field, e.g. ensemble.d_M")
    sweep_p.add_argument("--grid", required=True,
                         help="lo:hi:n, log:lo:hi:n, or comma list")
    sweep_p.add_argument("--config", default=None)
    sweep_p.add_argument("--out", default="transduce_out")
    sweep_p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sweep_p.add_argument("--workers", type=int, default=None)

    val_p = sub.add_parser("validate", help="check a config file")
    val_p.add_argument("--config", required=True)
    return p


def _cmd_run(args):
    try:
        rows, out = run_experiment(args.name, config_path=args.config,
                                   out_dir=args.out, seed=args.seed,
                                   workers=_worker_count(args))
    except UnknownExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    width = max(len(r.name) for r in rows)
    for r in rows:
        mark = "pass" if r.passed else "FAIL"
        print(f"  {r.name:<{width}}  {r.engine_value:.6g}  "
              f"(reference {r.reference_value:.6g} +/- {r.tolerance:.3g})  "
              f"{mark}")
    n_fail = sum(not r.passed for r in rows)
    print(f"{args.name}: {len(rows) - n_fail}/{len(rows)} rows pass; "
          f"artifacts in {out}")
    return 0 if n_fail == 0 else 1


def _cmd_sweep(args):
    try:
        grid = parse_grid(args.grid)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    try:
        rows, path = run_sweep(args.name, args.axis, grid,
                               config_path=args.config, out_dir=args.out,
                               seed=args.seed, workers=_worker_count(args))
    except (UnknownExperimentError, SweepAxisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    print(f"{args.name}: swept {args.axis} over {len(rows)} points -> {path}")
    return 0


def _cmd_validate(args):
    try:
        cfg = load_config(args.config)
        cfg.validate()
    except (ConfigError, OSError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    print(f"ok: {args.config}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "sweep":
        return _cmd_sweep(args)
    if args.command == "validate":
        return _cmd_validate(args)
    parser.error(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
