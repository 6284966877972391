"""Command-line entry point: ``radiostripes {simulate,sweep,verify}``."""

import argparse
import logging
import sys

from .evaluation import SCHEMES
from .experiments import ConfigError, ExperimentSpec, parse_config, rows_to_csv, run_experiment
from .hybrid import HYBRID_MODES
from .linalg import NumericalError


def _schemes(text):
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in items if s not in SCHEMES]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"schemes must come from {', '.join(SCHEMES)}")
    return items


def _checks(text):
    try:
        nums = sorted({int(s) for s in text.split(",") if s.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError("criteria must be comma-separated integers") from None
    if not nums or nums[0] < 1 or nums[-1] > 10:
        raise argparse.ArgumentTypeError("criteria are numbered 1 to 10")
    return nums


def build_parser():
    p = argparse.ArgumentParser(
        prog="radiostripes",
        description="Sequential in-network processing on parallel radio stripes.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment file (defaults if omitted)")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--trials", type=int, help="Monte-Carlo trials per point")
    common.add_argument("--scheme", type=_schemes, help="comma-separated schemes")
    common.add_argument("--hybrid", choices=HYBRID_MODES, help="hybrid analog/digital mode")
    common.add_argument("--out", help="CSV output path (stdout if omitted)")

    sub.add_parser("simulate", parents=[common], help="evaluate one operating point")
    sub.add_parser("sweep", parents=[common], help="sweep the configured axis")
    v = sub.add_parser("verify", help="run the oracle and acceptance checks")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--criteria", type=_checks, help="comma-separated criterion numbers")
    v.add_argument("--out", help="also write the result lines to this file")
    return p


def _load(args):
    spec = parse_config(args.config) if args.config else ExperimentSpec()
    if args.scheme:
        spec.schemes = args.scheme
    if args.hybrid:
        spec.hybrid = args.hybrid
    if args.trials is not None and args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    if args.seed is not None and args.seed < 0:
        raise ConfigError("--seed must be nonnegative")
    return spec


def _run(args):
    if args.command == "verify":
        from .verification import run_checks

        results = run_checks(args.criteria, seed=args.seed)
        lines = [r.line() for r in results]
        print("\n".join(lines))
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
        return 0 if all(r.passed for r in results) else 1

    spec = _load(args)
    if args.command == "simulate":
        spec.sweep_axis, spec.sweep_values = None, []
    elif spec.sweep_axis is None:
        raise ConfigError("sweep needs sweep_axis and sweep_values in the config")
    rows = run_experiment(spec, seed=args.seed, trials=args.trials)
    out = args.out or spec.output_path
    text = rows_to_csv(rows, out)
    if out is None:
        sys.stdout.write(text)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except (ConfigError, NumericalError, ValueError, OSError) as exc:
        print(f"radiostripes: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
