"""Command line: ``strategem power | figure | validate``.

Exit status is 0 on success, 1 on runtime or check failure and 2 on usage
errors.
"""

import argparse
import os
import sys
import time
from pathlib import Path

from . import figures
from .exceptions import ConfigError
from .mcengine import default_workers
from .runner import MODES, scenario_rows, with_bonferroni, write_csv, write_json, write_table
from .scenarios import CASES, build_scenarios, parse_config
from .validate import run_checks

DEFAULT_SEED = 12345
DEFAULT_REPS = 10_000


class UsageError(Exception):
    pass


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("STRATEGEM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"STRATEGEM_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _list_of(conv):
    def parse(text):
        try:
            values = [conv(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value list {text!r}") from None
        if not values:
            raise argparse.ArgumentTypeError("empty value list")
        return values
    return parse


def _add_run_flags(p):
    p.add_argument("--reps", type=int, help=f"Monte Carlo replications (default {DEFAULT_REPS})")
    p.add_argument("--seed", type=int, help="master seed (default: $STRATEGEM_SEED or 12345)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: available CPUs); never changes results")
    p.add_argument("--fast", action="store_true", help="divide replication counts by 10")
    p.add_argument("--out", metavar="PATH", help="output file (power) or directory (figure)")


def build_parser():
    parser = argparse.ArgumentParser(prog="strategem", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("power", help="power for one scenario grid or a config file")
    p.add_argument("--config", metavar="PATH", help="TOML scenario document")
    p.add_argument("--case", choices=CASES)
    p.add_argument("--strategy", type=_list_of(str))
    p.add_argument("--n", type=_list_of(int))
    p.add_argument("--n1", type=_list_of(int))
    p.add_argument("--n2", type=_list_of(int))
    p.add_argument("--d", type=_list_of(float))
    p.add_argument("--c", type=_list_of(float))
    p.add_argument("--N", type=_list_of(int))
    p.add_argument("--M", type=_list_of(int))
    p.add_argument("--criteria", type=_list_of(str))
    p.add_argument("--weights", type=_list_of(float), help="w1,w2,w3,w4 (comorbidity)")
    p.add_argument("--sigma-eps", dest="sigma_eps", type=_list_of(float))
    p.add_argument("--sigma-delta", dest="sigma_delta", type=_list_of(float))
    p.add_argument("--alpha", type=_list_of(float))
    p.add_argument("--mode", choices=MODES, default="both")
    p.add_argument("--bonferroni", action="store_true",
                   help="divide alpha by the number of tested factors (off by default)")
    p.add_argument("--json", action="store_true", help="write JSON instead of CSV")
    _add_run_flags(p)

    f = sub.add_parser("figure", help="write the sweep behind a figure, one CSV per panel")
    f.add_argument("name", choices=sorted(figures.FIGURES))
    _add_run_flags(f)

    v = sub.add_parser("validate", help="run the built-in oracle and calibration checks")
    v.add_argument("--quick", action="store_true", help="sub-minute subset")
    v.add_argument("--goldens", metavar="PATH", help="alternative golden-value file")
    v.add_argument("--seed", type=int, default=None)
    return parser


_SCENARIO_FLAGS = ("strategy", "n", "n1", "n2", "d", "c", "N", "M", "criteria", "sigma_eps",
                   "sigma_delta", "alpha")


def _scenarios_from_flags(args):
    if args.config:
        if args.case:
            raise UsageError("--config and --case are mutually exclusive")
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        return parse_config(text)
    if not args.case:
        raise UsageError(f"either --config or --case is required (cases: {', '.join(CASES)})")
    entry = {"case": args.case}
    for key in _SCENARIO_FLAGS:
        value = getattr(args, key)
        if value is not None:
            entry[key] = value if len(value) > 1 else value[0]
    if args.weights is not None:
        if len(args.weights) != 4:
            raise UsageError("--weights needs four values")
        entry["weights"] = args.weights
    return build_scenarios(entry)


def _reps(args, default):
    reps = args.reps if args.reps is not None else default
    if args.fast:
        reps = max(1, reps // 10)
    if reps < 1:
        raise UsageError("--reps must be positive")
    return reps


def _workers(args):
    if args.workers is None:
        return default_workers()
    if args.workers < 1:
        raise UsageError("--workers must be positive")
    return args.workers


def cmd_power(args):
    try:
        scenarios = _scenarios_from_flags(args)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    if args.mode == "analytic" and args.reps is not None:
        print("warning: --reps is ignored in analytic mode", file=sys.stderr)
    seed = _seed(args)
    workers = _workers(args)
    rows = []
    for s in scenarios:
        if args.bonferroni:
            s = with_bonferroni(s)
        reps = _reps(args, s.reps or DEFAULT_REPS)
        rows.extend(scenario_rows(s, mode=args.mode, reps=reps,
                                  seed=s.seed if s.seed is not None else seed,
                                  workers=workers, progress=sys.stderr.isatty()))
    writer = write_json if args.json else write_csv
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer(rows, fh)
    else:
        writer(rows, sys.stdout)
    return 0


def cmd_figure(args):
    seed = _seed(args)
    reps = _reps(args, figures.DEFAULT_REPS[args.name])
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    panels = figures.FIGURES[args.name](reps=reps, seed=seed, workers=_workers(args))
    for panel, (columns, records) in panels.items():
        path = out / f"{panel}.csv"
        with open(path, "w", newline="") as fh:
            write_table(columns, records, fh)
        print(f"wrote {path} ({len(records)} rows)", file=sys.stderr)
    print(f"{args.name}: {time.perf_counter() - t0:.1f}s, {reps} replications per point",
          file=sys.stderr)
    return 0


def cmd_validate(args):
    seed = args.seed if args.seed is not None else 20240501
    t0 = time.perf_counter()
    results = run_checks(quick=args.quick, goldens=args.goldens, seed=seed)
    width = max(len(name) for name, _, _ in results)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    failed = [name for name, ok, _ in results if not ok]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed in "
          f"{time.perf_counter() - t0:.1f}s")
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


COMMANDS = {"power": cmd_power, "figure": cmd_figure, "validate": cmd_validate}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"strategem: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"strategem: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
