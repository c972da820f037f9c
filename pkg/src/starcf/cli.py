"""Command-line front end: run sweeps, validate moments, print defaults."""

import argparse
import json
import os
import sys
from pathlib import Path

from .config import default_config
from .experiment import (
    PRESETS,
    ExperimentSpec,
    render_validation_report,
    run_experiment,
    validate_run,
)

SEED_ENV_VAR = "STARCF_SEED"


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    return int(os.environ.get(SEED_ENV_VAR, "1"))


def _cmd_run(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.spec:
        data = json.loads(Path(args.spec).read_text())
        spec = ExperimentSpec.from_dict(data)
    elif args.figure:
        preset = PRESETS[args.figure]
        kwargs = {"trials": args.trials, "root_seed": seed}
        if args.figure == "4":
            kwargs["full"] = args.full
        spec = preset(**kwargs)
    else:
        print("error: either --figure or --spec is required", file=sys.stderr)
        return 1
    csv_path, meta_path = run_experiment(spec, args.out, jobs=args.jobs)
    print(f"wrote {csv_path}")
    print(f"wrote {meta_path}")
    return 0


def _cmd_validate(args) -> int:
    report = validate_run(trials=args.trials, seed=_resolve_seed(args.seed))
    print(render_validation_report(report))
    return 1 if report["status"] == "fail" else 0


def _cmd_print_config(args) -> int:
    print(json.dumps(default_config().to_dict(), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starcf",
        description="STAR-RIS assisted cell-free massive MIMO downlink "
                    "simulator and power allocator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a figure preset or a spec file")
    run_p.add_argument("--figure", choices=sorted(PRESETS),
                       help="figure preset to run")
    run_p.add_argument("--spec", help="JSON experiment spec file")
    run_p.add_argument("--out", default="results", help="output directory")
    run_p.add_argument("--seed", type=int, default=None,
                       help=f"root seed (falls back to ${SEED_ENV_VAR}, then 1)")
    run_p.add_argument("--trials", type=int, default=20,
                       help="scenario seeds per sweep point")
    run_p.add_argument("--jobs", type=int, default=1,
                       help="worker processes over sweep points")
    run_p.add_argument("--full", action="store_true",
                       help="extend figure 4 to the largest surface")
    run_p.set_defaults(func=_cmd_run)

    val_p = sub.add_parser("validate",
                           help="Monte Carlo moment validation gate")
    val_p.add_argument("--trials", type=int, default=10_000)
    val_p.add_argument("--seed", type=int, default=None)
    val_p.set_defaults(func=_cmd_validate)

    cfg_p = sub.add_parser("print-config", help="print resolved defaults")
    cfg_p.set_defaults(func=_cmd_print_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
