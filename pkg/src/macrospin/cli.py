"""Command-line interface: experiment subcommands, the ETH report, the
effective-model demo, and the invariant suite.

Plans come from a JSON config whose keys mirror ExperimentPlan field names;
command-line flags override config values.  Exit codes: 2 for malformed
configs or plans, 3 for capacity violations.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .errors import CapacityError, RunFailureError, ValidationError
from .experiments import (
    ExperimentPlan,
    plan_metadata,
    run_eth_report,
    run_lbit_demo,
    run_scaling,
    run_staggered,
    run_time_series,
    write_eth_csv,
    write_metadata,
    write_run_result,
)

EXIT_BAD_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_RUN_FAILED = 4

_PLAN_FIELDS = set(ExperimentPlan.__dataclass_fields__)


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SystemExit(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        print(f"malformed config {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}",
              file=sys.stderr)
        raise SystemExit(EXIT_BAD_CONFIG) from exc
    if not isinstance(data, dict):
        print(f"malformed config {path}: top level must be an object", file=sys.stderr)
        raise SystemExit(EXIT_BAD_CONFIG)
    unknown = set(data) - _PLAN_FIELDS
    if unknown:
        print(f"malformed config {path}: unknown field(s) {sorted(unknown)}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_CONFIG)
    return data


def _build_plan(args) -> ExperimentPlan:
    data: dict = {}
    if args.config:
        data.update(_load_config(args.config))
    overrides = {
        "sizes": tuple(args.n) if args.n else None,
        "h_values": tuple(args.h) if args.h else None,
        "realizations": args.realizations,
        "states": args.states,
        "state_kind": args.state_kind,
        "thetas": tuple(args.thetas) if args.thetas else None,
        "master_seed": args.seed,
        "preset": args.preset,
        "t_min": args.t_min,
        "t_max": args.t_max,
        "points_per_decade": args.points_per_decade,
        "restarts": args.restarts,
        "tol": args.tol,
        "workers": args.workers,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("sizes", "h_values", "thetas", "times"):
        if key in data and data[key] is not None:
            data[key] = tuple(data[key])
    if isinstance(data.get("realizations"), str) and data["realizations"].isdigit():
        data["realizations"] = int(data["realizations"])
    try:
        return ExperimentPlan(**data)
    except CapacityError as exc:
        print(f"capacity violation: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CAPACITY) from exc
    except (ValidationError, TypeError) as exc:
        print(f"invalid plan: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_CONFIG) from exc


def _print_seed_table(plan: ExperimentPlan) -> None:
    print("n,h,realization,seed")
    for row in plan.seed_table():
        print(f"{row['n']},{row['h']:.17g},{row['realization']},{row['seed']}")


def _run_plan_command(args, runner, prefix: str) -> int:
    plan = _build_plan(args)
    if args.dry_run:
        _print_seed_table(plan)
        return 0
    try:
        result = runner(plan)
    except RunFailureError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILED
    paths = write_run_result(result, args.out, args.prefix or prefix)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


def _add_plan_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON plan whose keys mirror ExperimentPlan fields")
    sub.add_argument("--n", type=int, action="append", help="system size (repeatable)")
    sub.add_argument("--h", type=float, action="append", help="disorder strength (repeatable)")
    sub.add_argument("--realizations", help="count, 'desk-scale', or 'paper-scale'")
    sub.add_argument("--states", type=int, help="initial states per realization")
    sub.add_argument("--state-kind", dest="state_kind", choices=("random_ghz", "rotated_neel", "ghz"))
    sub.add_argument("--thetas", type=float, action="append", help="rotation angles for rotated_neel")
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument("--preset", choices=("heisenberg", "xx_anderson"))
    sub.add_argument("--t-min", dest="t_min", type=float)
    sub.add_argument("--t-max", dest="t_max", type=float)
    sub.add_argument("--points-per-decade", dest="points_per_decade", type=int)
    sub.add_argument("--restarts", type=int, help="optimizer restarts per evaluation")
    sub.add_argument("--tol", type=float, help="optimizer projected-gradient tolerance")
    sub.add_argument("--workers", type=int, help="parallel workers (MACROSPIN_THREADS caps this)")
    sub.add_argument("--out", default="out", help="output directory")
    sub.add_argument("--prefix", help="output filename prefix")
    sub.add_argument("--dry-run", action="store_true", help="print the derived seed table and exit")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="macrospin", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("time-series", "macroscopicity against time, averaged over disorder and states"),
        ("scaling", "saturated macroscopicity against system size"),
        ("staggered", "saturated staggered-magnetization variance against system size"),
    ):
        sub = subs.add_parser(name, help=help_text)
        _add_plan_flags(sub)

    eth = subs.add_parser("eth-report", help="time-averaged vs thermal fluctuation comparison")
    _add_plan_flags(eth)

    demo = subs.add_parser("lbit-demo", help="dephasing vs free precession in the effective model")
    demo.add_argument("--n", type=int, default=8)
    demo.add_argument("--xi2", type=float, default=0.5)
    demo.add_argument("--energy-scale", type=float, default=2.0)
    demo.add_argument("--coupling-scale", type=float, default=0.5)
    demo.add_argument("--seed", type=int, default=42)
    demo.add_argument("--out", default="out")
    demo.add_argument("--prefix", default="lbit_demo")

    val = subs.add_parser("validate", help="run the module invariant suite")
    val.add_argument("--quick", action="store_true", help="reduced sizes and sample counts")

    args = parser.parse_args(argv)

    if args.command == "validate":
        from .validate import run_all

        return 0 if run_all(quick=args.quick) else 1

    if args.command == "lbit-demo":
        import os

        rows, meta = run_lbit_demo(
            n_sites=args.n,
            xi2=args.xi2,
            energy_scale=args.energy_scale,
            coupling_scale=args.coupling_scale,
            seed=args.seed,
        )
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{args.prefix}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        meta_path = os.path.join(args.out, f"{args.prefix}_meta.json")
        write_metadata(meta, meta_path)
        print(f"records: {path}")
        print(f"meta: {meta_path}")
        return 0

    if args.command == "eth-report":
        plan = _build_plan(args)
        if args.dry_run:
            _print_seed_table(plan)
            return 0
        import os

        try:
            records = run_eth_report(plan)
        except RunFailureError as exc:
            print(f"run failed: {exc}", file=sys.stderr)
            return EXIT_RUN_FAILED
        os.makedirs(args.out, exist_ok=True)
        prefix = args.prefix or "eth_report"
        path = os.path.join(args.out, f"{prefix}.csv")
        write_eth_csv(records, path)
        meta_path = os.path.join(args.out, f"{prefix}_meta.json")
        write_metadata(plan_metadata(plan, plan.time_grid()), meta_path)
        print(f"records: {path}")
        print(f"meta: {meta_path}")
        return 0

    runner = {
        "time-series": run_time_series,
        "scaling": run_scaling,
        "staggered": run_staggered,
    }[args.command]
    try:
        return _run_plan_command(args, runner, args.command.replace("-", "_"))
    except (ValidationError,) as exc:
        print(f"invalid plan: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
