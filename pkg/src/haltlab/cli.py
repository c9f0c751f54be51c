"""``haltlab`` command-line driver."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import harness
from .fixpoint import HaltingOperator, StillRunning, iterate_chain, make_p_omega
from .machine import HaltsAt, MachineError, run_bounded
from .mutants import MUTANTS
from .suite import SuiteConfig, run_suite, with_overrides

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _bound_range(text: str) -> range:
    """``A..B`` (inclusive) or a single ``B`` meaning ``0..B``."""
    lo, sep, hi = text.partition("..")
    try:
        a, b = (int(lo), int(hi)) if sep else (0, int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None
    if a < 0:
        raise argparse.ArgumentTypeError("bounds must be non-negative")
    return range(a, b + 1)


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _load(args) -> tuple[str, object, object]:
    path = Path(args.machine)
    if not path.is_file():
        raise UsageError(f"no such machine file: {path}")
    try:
        machine = harness.load_machine(path)
        inp = harness.parse_input(machine, args.input)
    except (MachineError, ValueError, UnicodeDecodeError) as exc:
        raise UsageError(f"{path}: {exc}") from exc
    return path.stem, machine, inp


def cmd_run(args, settings: harness.Settings) -> int:
    _, machine, inp = _load(args)
    verdict, ledger = run_bounded(machine, inp, args.bound)
    if args.format == "json":
        print(json.dumps({"verdict": "HALTS" if isinstance(verdict, HaltsAt) else "RUNNING",
                          "step": verdict.step, **ledger.as_dict()}))
    else:
        print(harness.format_run(verdict, ledger))
    return EXIT_OK if isinstance(verdict, HaltsAt) else EXIT_NEGATIVE


def cmd_chain(args, settings: harness.Settings) -> int:
    name, machine, inp = _load(args)
    n = settings.chain_cap if args.n is None else args.n
    window = args.window or settings.window
    record = iterate_chain(machine, inp, n, operator=HaltingOperator(machine, inp, window))
    out = {"csv": harness.chain_csv, "json": lambda r: harness.chain_json(r, name)}.get(args.format, harness.chain_table)
    sys.stdout.write(out(record))
    return EXIT_OK


def cmd_overhead(args, settings: harness.Settings) -> int:
    _, machine, inp = _load(args)
    bounds = args.bounds if args.bounds is not None else range(settings.overhead_max + 1)
    rows = harness.overhead_table(machine, inp, bounds)
    if args.format == "csv":
        sys.stdout.write(harness.overhead_csv(rows))
    else:
        for r in rows:
            flag = "ok" if r.meets_bound else "BELOW T+1"
            print(f"T={r.bound:<4} {r.verdict}; ticks: {r.ledger.total}  {flag}")
    return EXIT_OK if all(r.meets_bound for r in rows) else EXIT_NEGATIVE


def cmd_diagonalize(args, settings: harness.Settings) -> int:
    horizon = args.horizon or settings.loop_horizon
    tr = harness.diagonalize(args.bound, loop_horizon=horizon)
    if args.format == "json":
        print(json.dumps(tr.as_dict(), sort_keys=True))
    else:
        print("\n".join(tr.lines()))
    return EXIT_OK if tr.contradiction else EXIT_NEGATIVE


def cmd_omega(args, settings: harness.Settings) -> int:
    _, machine, inp = _load(args)
    fuel = settings.fuel if args.fuel is None else args.fuel
    p = make_p_omega(machine, inp, fuel)
    if isinstance(p, StillRunning):
        print(f"STILL RUNNING after {p.fuel} steps; no limit produced")
        return EXIT_NEGATIVE
    print(p)
    return EXIT_OK


def cmd_suite(args, settings: harness.Settings) -> int:
    seed = settings.seed if args.seed is None else args.seed
    cfg = with_overrides(SuiteConfig.for_scale(args.scale, seed), population=args.population)
    operator = HaltingOperator
    if args.mutant:
        operator = MUTANTS[args.mutant]
        cfg = with_overrides(cfg, mutants=False)
    report = run_suite(cfg, operator)
    if args.mutant:
        print(f"operator: mutant {args.mutant}")
    sys.stdout.write(report.to_json() if args.format == "json" else report.text())
    return EXIT_OK if report.passed else EXIT_NEGATIVE


def cmd_report(args, settings: harness.Settings) -> int:
    name, machine, inp = _load(args)
    rep = harness.build_report(name, machine, inp, settings, stages=args.n, diagonal_bound=args.bound)
    sys.stdout.write(rep.to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="haltlab", description="Halting-observation experiments.")
    parser.add_argument("--config", help=f"key=value settings file (default: ${harness.CONFIG_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    def machine_cmd(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("machine", help=".tm machine description, .gasm guest assembly, or a binary encoding")
        p.add_argument("--input", default="self", help="'self' (default), 'empty', or a literal")
        return p

    p = machine_cmd("run", "bounded run with tick accounting")
    p.add_argument("--bound", "-T", type=_nonneg, default=100)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_run)

    p = machine_cmd("chain", "Kleene chain p_0 .. p_n")
    p.add_argument("-n", type=_nonneg, default=None, help="number of stages after p_0")
    p.add_argument("--window", type=_nonneg, default=None)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.set_defaults(func=cmd_chain)

    p = machine_cmd("overhead", "ledger totals against the bound T")
    p.add_argument("--bounds", type=_bound_range, default=None, help="A..B inclusive")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_overhead)

    p = machine_cmd("omega", "limit of the chain for a machine that halts within the fuel")
    p.add_argument("--fuel", type=_nonneg, default=None)
    p.set_defaults(func=cmd_omega)

    p = machine_cmd("report", "JSON experiment report for one machine")
    p.add_argument("-n", type=_nonneg, default=16)
    p.add_argument("--bound", type=_nonneg, default=3, help="bound for the diagonalization section")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("diagonalize", help="run D_T against its diagonalizer X")
    p.add_argument("--bound", "-T", type=_nonneg, required=True)
    p.add_argument("--horizon", type=_nonneg, default=None, help="steps to watch X for")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_diagonalize)

    p = sub.add_parser("suite", help="run the property suite")
    p.add_argument("--scale", choices=("default", "quick"), default="default")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--population", type=_nonneg, default=None, help="sample this many enumerated machines")
    p.add_argument("--mutant", choices=sorted(MUTANTS), default=None, help="run against a broken F")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        settings = harness.load_settings(args.config)
    except (OSError, ValueError) as exc:
        print(f"haltlab: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, settings)
    except UsageError as exc:
        print(f"haltlab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
