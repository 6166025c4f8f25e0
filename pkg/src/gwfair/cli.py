"""Command line front end.

Exit codes: 0 on success (and on a passing run), 1 when a run's verdict
fails, 2 on usage, config, or setup errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import dump_config, parse_config
from .errors import GwFairError
from .experiments import BUILTIN_NAMES, builtin, run_experiment, to_network
from .oracle import solve

_DESCRIPTIONS = {
    "three_sources": "one bottleneck link, three always-on sources (cases 1-3)",
    "three_sources_transient": "same link, middle source on only during 400-800 ms (cases 1-3)",
    "source_bottleneck": "first source demand-capped below its share (cases 1-3)",
    "gfc2": "six-link chain with cross traffic, 23 sessions",
}


def _bool_arg(text: str) -> bool:
    t = text.strip().lower()
    if t == "true":
        return True
    if t == "false":
        return False
    raise argparse.ArgumentTypeError("expected true or false")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwfair",
        description="Simulate weighted explicit-rate allocation and compare it "
                    "against the centralized solver.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate an experiment and judge the outcome")
    run.add_argument("experiment", metavar="NAME|FILE",
                     help="packaged experiment name, or path to a config file")
    run.add_argument("--case", type=int, default=None,
                     help="guarantee/weight variant for packaged experiments (default 1)")
    run.add_argument("--use-measured-ccr", metavar="BOOL", type=_bool_arg, default=None,
                     help="true: switches measure per-connection rates (the default); "
                          "false: switches trust the rate declared in forward RM cells")
    run.add_argument("--duration", type=float, metavar="MS", help="override run length")
    run.add_argument("--window", type=float, metavar="FRAC",
                     help="trailing fraction of the run treated as steady state "
                          "(default 0.2)")
    run.add_argument("--out", metavar="DIR", help="write CSV outputs here")
    run.add_argument("--dump-config", action="store_true",
                     help="print the resolved config and exit without running")

    oracle = sub.add_parser("oracle", help="print the solver allocation for an experiment")
    oracle.add_argument("experiment", metavar="NAME|FILE",
                        help="packaged experiment name, or path to a config file")
    oracle.add_argument("--case", type=int, default=None)

    sub.add_parser("list", help="list the packaged experiments")
    return parser


def _load_spec(args):
    name = args.experiment
    if name in BUILTIN_NAMES:
        measured = getattr(args, "use_measured_ccr", None)
        return builtin(name, case=args.case if args.case is not None else 1,
                       use_measured_source_rate=measured)
    if args.case is not None:
        raise GwFairError("--case only applies to packaged experiments")
    with open(name) as f:
        spec = parse_config(f.read())
    measured = getattr(args, "use_measured_ccr", None)
    if measured is not None:
        spec = dataclasses.replace(
            spec, switch=dataclasses.replace(spec.switch,
                                             use_measured_source_rate=measured))
    return spec


def _cmd_run(args) -> int:
    spec = _load_spec(args)
    if args.dump_config:
        sys.stdout.write(dump_config(spec))
        return 0
    report = run_experiment(spec, out_dir=args.out, duration_ms=args.duration,
                            window=args.window)
    print(f"experiment {report.experiment}")
    print(f"{'vc':<6} {'oracle':>10} {'sim':>10} {'ref':>10} {'rel_err':>9} {'conv_ms':>9}")
    for r in report.rows:
        ref = f"{r.ref_mbps:.2f}" if r.ref_mbps is not None else "-"
        conv = f"{r.conv_ms:.0f}" if r.conv_ms is not None else "NC"
        print(f"{r.vc:<6} {r.oracle_mbps:>10.3f} {r.sim_mbps:>10.3f} {ref:>10} "
              f"{r.rel_err:>9.4f} {conv:>9}")
    for row in report.links:
        z = f"{row.mean_load_factor:.3f}" if row.mean_load_factor is not None else "-"
        print(f"link {row.link}: util {row.util:.3f}, load factor {z}, "
              f"max queue {row.max_queue_cells} cells")
    if args.out:
        print(f"wrote CSV outputs to {args.out}")
    if report.passed:
        print("PASS")
        return 0
    for reason in report.failures:
        print(f"FAIL: {reason}")
    return 1


def _cmd_oracle(args) -> int:
    spec = _load_spec(args)
    net = to_network(spec)
    allocation = solve(net)
    print(f"allocation for {spec.name}")
    for sid, rate in allocation.rates.items():
        print(f"{sid:<6} {rate:.4f}")
    print("bottleneck rounds:")
    for rnd, ids in allocation.order:
        print(f"  {rnd}: {', '.join(str(i) for i in ids)}")
    return 0


def _cmd_list() -> int:
    width = max(len(n) for n in BUILTIN_NAMES) + 2
    for name in BUILTIN_NAMES:
        print(f"{name:<{width}}{_DESCRIPTIONS[name]}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        return _cmd_list()
    except GwFairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
