"""Experiment plumbing shared by the CLI, the suite and the demos.

Loading machines and inputs, overhead tables, diagonalization transcripts,
chain serialization, settings files and whole-experiment reports.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from . import guest, tm
from .fixpoint import DEFAULT_CHAIN_CAP, DEFAULT_WINDOW, ChainRecord, iterate_chain
from .guest import GuestProgram, GuestVerdict
from .machine import CostLedger, HaltsAt, Machine, RunVerdict, run_bounded

CONFIG_ENV = "HALTLAB_CONFIG"
REPORT_SCHEMA = "haltlab.report/1"
CHAIN_SCHEMA = "haltlab.chain/1"


# -- settings -------------------------------------------------------------------


@dataclass(frozen=True)
class Settings:
    chain_cap: int = DEFAULT_CHAIN_CAP
    window: int = DEFAULT_WINDOW
    fuel: int = 1000
    schedule: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024)
    overhead_max: int = 20
    loop_horizon: int = 1000
    seed: int = 0


def parse_settings(text: str, base: Settings = Settings()) -> Settings:
    """``key = value`` lines; ``#`` comments; unknown keys are an error."""
    fields = {f.name: f for f in dataclasses.fields(Settings)}
    updates: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in fields:
            raise ValueError(f"config line {lineno}: unknown setting {key!r}")
        if key == "schedule":
            updates[key] = tuple(int(v) for v in value.replace(",", " ").split())
        else:
            updates[key] = int(value)
    return dataclasses.replace(base, **updates)


def load_settings(path: Optional[str] = None) -> Settings:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return Settings()
    return parse_settings(Path(path).read_text(encoding="utf-8"))


# -- machines and inputs --------------------------------------------------------


def load_machine(path: str | Path) -> Machine:
    """``.tm`` descriptions, guest assembly (``.gasm``), or binary encodings."""
    path = Path(path)
    data = path.read_bytes()
    if data.startswith(tm.MAGIC):
        return tm.decode(data)
    if data.startswith(guest.MAGIC):
        return guest.load_program(data)
    text = data.decode("utf-8")
    if path.suffix in (".gasm", ".asm", ".gvm"):
        return guest.assemble(text)
    return tm.parse_machine(text)


def parse_input(machine: Machine, spec: Optional[str]) -> Any:
    """``self`` (default) is the machine's own encoding; ``empty`` is no input.

    Anything else is, for Turing machines, a word of one-character symbols and,
    for guest programs, a decimal integer or ``hex:...`` bytes.
    """
    if spec is None or spec == "self":
        return machine.default_input()
    if isinstance(machine, GuestProgram):
        if spec == "empty":
            return b""
        if spec.isdigit():
            return int(spec)
        if spec.startswith("hex:"):
            return bytes.fromhex(spec[4:])
        return spec.encode("utf-8")
    if spec == "empty":
        return ()
    return tuple(spec)


def encoding_of(machine: Machine) -> bytes:
    return guest.encode(machine) if isinstance(machine, GuestProgram) else tm.encode(machine)


def digest(machine: Machine) -> str:
    return hashlib.sha256(encoding_of(machine)).hexdigest()[:16]


def describe_input(input: Any) -> str:
    if isinstance(input, bytes):
        return f"bytes[{len(input)}]"
    if isinstance(input, int):
        return str(input)
    return f"word[{len(input)}]"


def format_run(verdict: RunVerdict, ledger: CostLedger) -> str:
    return f"{verdict}; ticks: {ledger.total}"


# -- overhead ------------------------------------------------------------------


@dataclass(frozen=True)
class OverheadRow:
    bound: int
    verdict: RunVerdict
    ledger: CostLedger

    @property
    def meets_bound(self) -> bool:
        return self.ledger.total >= self.bound + 1 or isinstance(self.verdict, HaltsAt)


def overhead_table(machine: Machine, input: Any, bounds) -> list[OverheadRow]:
    rows = []
    for T in bounds:
        verdict, ledger = run_bounded(machine, input, T)
        rows.append(OverheadRow(T, verdict, ledger))
    return rows


def overhead_csv(rows: list[OverheadRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bound", "verdict", "step", "simulated_steps", "verdict_ticks", "total"])
    for r in rows:
        kind = "HALTS" if isinstance(r.verdict, HaltsAt) else "RUNNING"
        w.writerow([r.bound, kind, r.verdict.step, r.ledger.simulated_steps, r.ledger.verdict_ticks, r.ledger.total])
    return buf.getvalue()


# -- diagonalization -------------------------------------------------------------


@dataclass(frozen=True)
class DiagonalTranscript:
    bound: int
    decider_verdict: GuestVerdict
    decider_steps: int
    x_halts: bool
    x_step: Optional[int]
    loop_horizon: int

    @property
    def contradiction(self) -> bool:
        if self.decider_verdict is GuestVerdict.DOES_NOT_HALT:
            return self.x_halts
        return not self.x_halts and self.x_step is not None

    def witness(self) -> str:
        if self.x_halts:
            return f"X halts at step {self.x_step} (bound {self.bound})"
        if self.x_step is not None:
            return f"X reaches LOOP at step {self.x_step}; still running at {self.loop_horizon}"
        return f"X still running at {self.loop_horizon} without reaching LOOP"

    def lines(self) -> list[str]:
        return [
            f"bound: {self.bound}",
            f"decider verdict on <X>: {self.decider_verdict.name} (after {self.decider_steps} steps)",
            f"X behavior: {self.witness()}",
            f"contradiction: {'yes' if self.contradiction else 'NO'}",
        ]

    def as_dict(self) -> dict[str, Any]:
        return {
            "bound": self.bound,
            "decider_verdict": self.decider_verdict.name,
            "decider_steps": self.decider_steps,
            "x_halts": self.x_halts,
            "x_step": self.x_step,
            "loop_horizon": self.loop_horizon,
            "contradiction": self.contradiction,
        }


def diagonalize(T: int, decider: Optional[GuestProgram] = None, loop_horizon: int = 1000) -> DiagonalTranscript:
    """Build D_T (or use ``decider``) and X, then run both sides."""
    if T < 0:
        raise ValueError("bound must be non-negative")
    decider = decider or guest.make_bounded_decider(T)
    x = guest.make_diagonalizer(decider)
    d_run = guest.execute(decider, guest.encode(x), decider.cost_bound + 1)
    verdict = d_run.output
    x_verdict, _ = run_bounded(x, b"", loop_horizon)
    if isinstance(x_verdict, HaltsAt):
        return DiagonalTranscript(T, verdict, d_run.verdict.step, True, x_verdict.step, loop_horizon)
    return DiagonalTranscript(T, verdict, d_run.verdict.step, False, guest.reaches_loop(x, b"", loop_horizon), loop_horizon)


# -- chain serialization -------------------------------------------------------


def chain_rows(record: ChainRecord) -> list[tuple[int, Any, str]]:
    rows: list[tuple[int, Any, str]] = []
    for i, stage in enumerate(record.stages):
        if not stage.entries:
            rows.append((i, "", "⊥"))
        for k, v in stage.entries:
            rows.append((i, k, str(v)))
    return rows


def chain_csv(record: ChainRecord) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stage", "index", "value"])
    w.writerows(chain_rows(record))
    return buf.getvalue()


def chain_dict(record: ChainRecord, machine_id: str = "") -> dict[str, Any]:
    return {
        "schema": CHAIN_SCHEMA,
        "machine": machine_id,
        "digest": digest(record.machine),
        "input": describe_input(record.input),
        "stages": [str(s) for s in record.stages],
        "ledgers": [l.as_dict() for l in record.ledger_per_stage],
    }


def chain_json(record: ChainRecord, machine_id: str = "") -> str:
    return json.dumps(chain_dict(record, machine_id), indent=2, ensure_ascii=False) + "\n"


def chain_table(record: ChainRecord) -> str:
    width = max(len(str(len(record.stages) - 1)), 5)
    lines = [f"{'stage':>{width}}  {'ticks':>5}  observation"]
    for i, (s, l) in enumerate(zip(record.stages, record.ledger_per_stage)):
        lines.append(f"{i:>{width}}  {l.total:>5}  {s}")
    return "\n".join(lines) + "\n"


# -- experiment reports --------------------------------------------------------


@dataclass(frozen=True)
class ExperimentReport:
    machine_id: str
    digest: str
    input: str
    seed: int
    chain: dict[str, Any]
    overhead: list[dict[str, Any]]
    diagonal: dict[str, Any]
    suite: list[dict[str, Any]]

    def as_dict(self) -> dict[str, Any]:
        return {"schema": REPORT_SCHEMA, **dataclasses.asdict(self)}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def build_report(
    machine_id: str,
    machine: Machine,
    input: Any = None,
    settings: Settings = Settings(),
    stages: int = 16,
    diagonal_bound: int = 3,
    suite_results: Optional[list] = None,
) -> ExperimentReport:
    if input is None:
        input = machine.default_input()
    record = iterate_chain(machine, input, stages)
    rows = overhead_table(machine, input, range(settings.overhead_max + 1))
    overhead = [
        {"bound": r.bound, "verdict": str(r.verdict), "total": r.ledger.total, "meets_bound": r.meets_bound}
        for r in rows
    ]
    transcript = diagonalize(diagonal_bound, loop_horizon=settings.loop_horizon)
    suite = [r.as_dict() for r in suite_results] if suite_results else []
    return ExperimentReport(
        machine_id=machine_id,
        digest=digest(machine),
        input=describe_input(input),
        seed=settings.seed,
        chain=chain_dict(record, machine_id),
        overhead=overhead,
        diagonal=transcript.as_dict(),
        suite=suite,
    )
