"""A small register VM with nested simulation and self-reference.

Registers r0..r15 hold non-negative integers or byte strings.  r0 carries
the input.  Three registers have fixed roles:

* r13 -- scratch for the self-encoding computed by :func:`quine_transform`,
* r14 -- status written by EXEC (1 = inner program halted, 0 = it did not),
* r15 -- value emitted by the inner program during EXEC (0 if none).

A configuration whose program counter sits on HALT is halting; HALT itself
is never charged.  Every other instruction retires in one tick, except EXEC,
which takes one dispatch tick plus one tick per inner step it simulates.
Inside EXEC, a program that does not decode or that faults is treated as a
program that never halts.
"""

from __future__ import annotations

import enum
import functools
import re
import struct
from collections.abc import Iterator
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Union

from .machine import (
    CostLedger,
    Halted,
    HaltsAt,
    Machine,
    MachineError,
    Running,
    RunningAt,
    RunVerdict,
    StepOutcome,
    run_bounded,
)

N_REGISTERS = 16
SELF_REG = 13
STATUS_REG = 14
OUTPUT_REG = 15
SELF_OVERHEAD = 2

Value = Union[int, bytes]


class GuestError(MachineError):
    pass


class MalformedProgram(GuestError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"byte {offset}: {message}")


class GuestVerdict(enum.Enum):
    DOES_NOT_HALT = 0
    HALTS = 1

    @property
    def wire(self) -> bytes:
        return bytes([self.value])

    @classmethod
    def from_wire(cls, data: bytes) -> "GuestVerdict":
        if len(data) != 1 or data[0] not in (0, 1):
            raise ValueError(f"not a verdict byte: {data!r}")
        return cls(data[0])


@dataclass(frozen=True)
class Reg:
    index: int

    def __str__(self) -> str:
        return f"r{self.index}"


# opcode -> operand kinds; "r" register, "t" jump target, "v" literal, "e" emit operand
OPERANDS = {
    "LOAD": "rv",
    "COPY": "rr",
    "INC": "r",
    "DEC": "r",
    "JZ": "rt",
    "JMP": "t",
    "EXEC": "rrr",
    "EMIT": "e",
    "SELF": "r",
    "HALT": "",
    "LOOP": "",
    "QUOTE": "r",
}
OPCODES = {name: i + 1 for i, name in enumerate(OPERANDS)}
_TERMINAL = ("HALT", "LOOP", "JMP")


@dataclass(frozen=True)
class Instr:
    op: str
    args: tuple = ()

    def __str__(self) -> str:
        parts = [self.op]
        for kind, a in zip(OPERANDS[self.op], self.args):
            if kind == "r":
                parts.append(f"r{a}")
            elif kind == "v":
                parts.append(f"hex:{a.hex()}" if isinstance(a, bytes) else str(a))
            elif kind == "e":
                parts.append(a.name if isinstance(a, GuestVerdict) else str(a))
            else:
                parts.append(str(a))
        return " ".join(parts)


def _check_instr(ins: Instr, n: int, where: int) -> None:
    kinds = OPERANDS.get(ins.op)
    if kinds is None:
        raise GuestError(f"instruction {where}: unknown opcode {ins.op!r}")
    if len(ins.args) != len(kinds):
        raise GuestError(f"instruction {where}: {ins.op} takes {len(kinds)} operands")
    for kind, a in zip(kinds, ins.args):
        if kind == "r" and not (isinstance(a, int) and 0 <= a < N_REGISTERS):
            raise GuestError(f"instruction {where}: invalid register index {a!r}")
        if kind == "t" and not (isinstance(a, int) and 0 <= a < n):
            raise GuestError(f"instruction {where}: jump target {a!r} out of range")
        if kind == "v" and not (isinstance(a, bytes) or (isinstance(a, int) and not isinstance(a, bool) and a >= 0)):
            raise GuestError(f"instruction {where}: literal must be a non-negative int or bytes")
        if kind == "e" and not (
            isinstance(a, GuestVerdict) or (isinstance(a, Reg) and 0 <= a.index < N_REGISTERS)
        ):
            raise GuestError(f"instruction {where}: EMIT takes a verdict or a register")


@dataclass(frozen=True)
class Frame:
    program: "GuestProgram"
    pc: int
    registers: tuple
    output: Any = None
    call: Optional["Call"] = None

    @property
    def halting(self) -> bool:
        return self.call is None and self.program.instructions[self.pc].op == "HALT"


@dataclass(frozen=True)
class Call:
    inner: Frame
    budget: int
    used: int = 0


@dataclass(frozen=True)
class GuestConfig:
    frame: Frame
    step: int = 0


@dataclass(frozen=True)
class GuestProgram(Machine):
    instructions: tuple[Instr, ...]
    cost_bound: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        instrs = tuple(self.instructions)
        object.__setattr__(self, "instructions", instrs)
        if not instrs:
            raise GuestError("empty program")
        for i, ins in enumerate(instrs):
            _check_instr(ins, len(instrs), i)
        if instrs[-1].op not in _TERMINAL:
            raise GuestError("control can fall off the end of the program")

    def __len__(self) -> int:
        return len(self.instructions)

    @property
    def is_template(self) -> bool:
        return any(ins.op == "SELF" for ins in self.instructions)

    def initial(self, input: Value = b"") -> GuestConfig:
        if self.is_template:
            raise GuestError("program contains SELF; pass it through quine_transform first")
        return GuestConfig(_fresh_frame(self, input), 0)

    def step(self, config: GuestConfig) -> StepOutcome:
        if config.frame.halting:
            return Halted()
        return Running(GuestConfig(_advance(config.frame), config.step + 1))

    def default_input(self) -> bytes:
        return encode(self)

    def halting_trace(self, input: Value = b"") -> Iterator[bool]:
        frame = self.initial(input).frame
        while True:
            if frame.halting:
                yield True
                return
            yield False
            frame = _advance(frame)

    def __str__(self) -> str:
        return format_program(self)


def _fresh_frame(program: GuestProgram, input: Value) -> Frame:
    if not (isinstance(input, bytes) or (isinstance(input, int) and input >= 0)):
        raise GuestError("input must be bytes or a non-negative int")
    return Frame(program, 0, (input,) + (0,) * (N_REGISTERS - 1))


LOOP_PROGRAM = GuestProgram((Instr("LOOP"),))


def _set(regs: tuple, i: int, v: Value) -> tuple:
    return regs[:i] + (v,) + regs[i + 1 :]


def _int(v: Value, what: str) -> int:
    if not isinstance(v, int):
        raise GuestError(f"{what} needs an integer register, found bytes")
    return v


def _finish_call(frame: Frame, inner: Frame) -> Frame:
    out = inner.output
    if out is None:
        out = 0
    elif isinstance(out, GuestVerdict):
        out = out.value
    regs = _set(frame.registers, STATUS_REG, 1 if inner.halting else 0)
    regs = _set(regs, OUTPUT_REG, out)
    return replace(frame, pc=frame.pc + 1, registers=regs, call=None)


def _advance(frame: Frame) -> Frame:
    """One tick of a non-halting frame."""
    call = frame.call
    if call is not None:
        try:
            inner = _advance(call.inner)
        except GuestError:
            inner = Frame(LOOP_PROGRAM, 0, call.inner.registers)
        used = call.used + 1
        if inner.halting or used >= call.budget:
            return _finish_call(frame, inner)
        return replace(frame, call=Call(inner, call.budget, used))

    ins = frame.program.instructions[frame.pc]
    regs = frame.registers
    op, a = ins.op, ins.args
    nxt = frame.pc + 1
    if op == "LOAD":
        return replace(frame, pc=nxt, registers=_set(regs, a[0], a[1]))
    if op == "COPY":
        return replace(frame, pc=nxt, registers=_set(regs, a[0], regs[a[1]]))
    if op == "INC":
        return replace(frame, pc=nxt, registers=_set(regs, a[0], _int(regs[a[0]], "INC") + 1))
    if op == "DEC":
        return replace(frame, pc=nxt, registers=_set(regs, a[0], max(0, _int(regs[a[0]], "DEC") - 1)))
    if op == "JZ":
        v = regs[a[0]]
        return replace(frame, pc=a[1] if v in (0, b"") else nxt)
    if op == "JMP":
        return replace(frame, pc=a[0])
    if op == "LOOP":
        return frame
    if op == "EMIT":
        if frame.output is not None:
            raise GuestError("EMIT fired twice")
        out = a[0] if isinstance(a[0], GuestVerdict) else regs[a[0].index]
        return replace(frame, pc=nxt, output=out)
    if op == "QUOTE":
        text = regs[a[0]]
        if not isinstance(text, bytes):
            raise GuestError("QUOTE needs program bytes")
        body = decode(text)
        return replace(frame, pc=nxt, registers=_set(regs, a[0], encode(smn(body, text, register=a[0]))))
    if op == "EXEC":
        budget = _int(regs[a[2]], "EXEC budget")
        inner = Frame(_load_or_loop(regs[a[0]]), 0, (regs[a[1]],) + (0,) * (N_REGISTERS - 1))
        if inner.halting or budget == 0:
            return _finish_call(frame, inner)
        return replace(frame, call=Call(inner, budget, 0))
    if op == "SELF":
        raise GuestError("SELF is not executable")
    raise GuestError(f"cannot execute {op}")  # HALT frames never reach here


def _load_or_loop(v: Value) -> GuestProgram:
    if not isinstance(v, bytes):
        return LOOP_PROGRAM
    try:
        return load_program(v)
    except GuestError:
        return LOOP_PROGRAM


# -- runs -----------------------------------------------------------------


@dataclass(frozen=True)
class GuestRun:
    verdict: RunVerdict
    ledger: CostLedger
    output: Any
    final: GuestConfig

    @property
    def reached_loop(self) -> bool:
        f = self.final.frame
        return f.call is None and f.program.instructions[f.pc].op == "LOOP"


def execute(program: GuestProgram, input: Value, fuel: int) -> GuestRun:
    """Run for at most ``fuel`` steps, keeping the final configuration and output."""
    config = program.initial(input)
    while config.step < fuel and not config.frame.halting:
        config = program.step(config).next
    verdict: RunVerdict = HaltsAt(config.step) if config.frame.halting else RunningAt(fuel)
    return GuestRun(verdict, CostLedger(config.step, 1), config.frame.output, config)


def reaches_loop(program: GuestProgram, input: Value, fuel: int) -> Optional[int]:
    """Step at which top-level control sits on LOOP, if within ``fuel``."""
    config = program.initial(input)
    while config.step <= fuel:
        f = config.frame
        if f.call is None and f.program.instructions[f.pc].op == "LOOP":
            return config.step
        if f.halting:
            return None
        config = program.step(config).next
    return None


# -- binary encoding ----------------------------------------------------------

MAGIC = b"GV"
VERSION = 1
_HEADER = struct.Struct(">2sBI")


def _literal_bytes(v: Value) -> bytes:
    if isinstance(v, bytes):
        return b"\x01" + struct.pack(">I", len(v)) + v
    mag = v.to_bytes((v.bit_length() + 7) // 8, "big")
    return b"\x00" + struct.pack(">I", len(mag)) + mag


def encode(program: GuestProgram) -> bytes:
    body = bytearray(struct.pack(">H", len(program.instructions)))
    for ins in program.instructions:
        body.append(OPCODES[ins.op])
        for kind, a in zip(OPERANDS[ins.op], ins.args):
            if kind == "r":
                body.append(a)
            elif kind == "t":
                body += struct.pack(">I", a)
            elif kind == "v":
                body += _literal_bytes(a)
            elif isinstance(a, GuestVerdict):
                body += bytes([0, a.value])
            else:
                body += bytes([1, a.index])
    return _HEADER.pack(MAGIC, VERSION, len(body)) + bytes(body)


_NAMES = {code: name for name, code in OPCODES.items()}


@functools.lru_cache(maxsize=4096)
def decode(data: bytes) -> GuestProgram:
    if len(data) < _HEADER.size:
        raise MalformedProgram("truncated header", len(data))
    magic, version, length = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise MalformedProgram("bad magic", 0)
    if version != VERSION:
        raise MalformedProgram(f"unsupported version {version}", 2)
    end = _HEADER.size + length
    if len(data) != end:
        raise MalformedProgram("length prefix does not match data", min(len(data), end))
    pos = _HEADER.size

    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > end:
            raise MalformedProgram("payload truncated", pos)
        chunk = data[pos : pos + n]
        pos += n
        return chunk

    (count,) = struct.unpack(">H", take(2))
    instrs = []
    for _ in range(count):
        at = pos
        code = take(1)[0]
        if code not in _NAMES:
            raise MalformedProgram(f"unknown opcode {code}", at)
        name = _NAMES[code]
        args = []
        for kind in OPERANDS[name]:
            if kind == "r":
                args.append(take(1)[0])
            elif kind == "t":
                args.append(struct.unpack(">I", take(4))[0])
            elif kind == "v":
                tag_at = pos
                tag = take(1)[0]
                (n,) = struct.unpack(">I", take(4))
                raw = take(n)
                if tag == 1:
                    args.append(raw)
                elif tag == 0:
                    if raw[:1] == b"\x00":
                        raise MalformedProgram("non-canonical integer literal", tag_at)
                    args.append(int.from_bytes(raw, "big"))
                else:
                    raise MalformedProgram(f"bad literal tag {tag}", tag_at)
            else:
                sub_at = pos
                sub, val = take(2)
                if sub == 0 and val in (0, 1):
                    args.append(GuestVerdict(val))
                elif sub == 1:
                    args.append(Reg(val))
                else:
                    raise MalformedProgram("bad EMIT operand", sub_at)
        instrs.append(Instr(name, tuple(args)))
    if pos != end:
        raise MalformedProgram("trailing bytes", pos)
    try:
        return GuestProgram(tuple(instrs))
    except GuestError as exc:
        raise MalformedProgram(str(exc), _HEADER.size) from exc


def load_program(data: bytes) -> GuestProgram:
    """Decode an executable program; templates containing SELF are refused."""
    program = decode(bytes(data))
    if program.is_template:
        raise GuestError("raw program contains SELF")
    return program


# -- assembly text ------------------------------------------------------------


def _reg(tok: str, lineno: int) -> int:
    if tok[:1] in "rR" and tok[1:].isdigit():
        return int(tok[1:])
    raise GuestError(f"line {lineno}: expected a register, got {tok!r}")


_LABEL = re.compile(r"^([A-Za-z_]\w*):\s*(.*)$")


def assemble(text: str) -> GuestProgram:
    rows: list[tuple[int, str, list[str]]] = []
    labels: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        while (m := _LABEL.match(line)) is not None:
            label, line = m.group(1), m.group(2)
            if label in labels:
                raise GuestError(f"line {lineno}: duplicate label {label!r}")
            labels[label] = len(rows)
        if not line:
            continue
        toks = line.replace(",", " ").split()
        rows.append((lineno, toks[0].upper(), toks[1:]))

    instrs = []
    for lineno, op, toks in rows:
        kinds = OPERANDS.get(op)
        if kinds is None:
            raise GuestError(f"line {lineno}: unknown instruction {op!r}")
        if len(toks) != len(kinds):
            raise GuestError(f"line {lineno}: {op} takes {len(kinds)} operands")
        args: list[Any] = []
        for kind, tok in zip(kinds, toks):
            if kind == "r":
                args.append(_reg(tok, lineno))
            elif kind == "t":
                if tok.isdigit():
                    args.append(int(tok))
                elif tok in labels:
                    args.append(labels[tok])
                else:
                    raise GuestError(f"line {lineno}: unknown label {tok!r}")
            elif kind == "v":
                if tok.startswith("hex:"):
                    args.append(bytes.fromhex(tok[4:]))
                elif tok.isdigit():
                    args.append(int(tok))
                else:
                    raise GuestError(f"line {lineno}: bad literal {tok!r}")
            else:
                up = tok.upper()
                if up in GuestVerdict.__members__:
                    args.append(GuestVerdict[up])
                else:
                    args.append(Reg(_reg(tok, lineno)))
        instrs.append(Instr(op, tuple(args)))
    return GuestProgram(tuple(instrs))


def format_program(program: GuestProgram) -> str:
    return "".join(f"{ins}\n" for ins in program.instructions)


# -- program transformations ---------------------------------------------------


def relocate(program: GuestProgram, offset: int) -> tuple[Instr, ...]:
    out = []
    for ins in program.instructions:
        if ins.op == "JZ":
            ins = Instr("JZ", (ins.args[0], ins.args[1] + offset))
        elif ins.op == "JMP":
            ins = Instr("JMP", (ins.args[0] + offset,))
        out.append(ins)
    return tuple(out)


def smn(program: GuestProgram, literal: Value, register: int = 0) -> GuestProgram:
    """Fix an argument: write ``literal`` into ``register``, then run ``program``."""
    bound = None if program.cost_bound is None else program.cost_bound + 1
    return GuestProgram((Instr("LOAD", (register, literal)),) + relocate(program, 1), bound)


def quine_transform(template: GuestProgram) -> GuestProgram:
    """Close a SELF-using template into a program that can read its own encoding.

    The result is ``[LOAD r13 <B>, QUOTE r13] + body`` where ``B`` is
    ``[QUOTE r13] + body`` and each ``SELF rX`` became ``COPY rX r13``.  QUOTE
    rebuilds ``smn(B, <B>)`` -- the whole program -- so r13 holds exactly its
    encoding after two ticks.
    """
    if not template.is_template:
        raise ValueError("template has no SELF instruction; use the program directly")
    body = []
    for ins in template.instructions:
        regs = [a.index if isinstance(a, Reg) else a for kind, a in zip(OPERANDS[ins.op], ins.args) if kind in "re"]
        if SELF_REG in regs:
            raise ValueError(f"templates may not use r{SELF_REG}")
        body.append(Instr("COPY", (ins.args[0], SELF_REG)) if ins.op == "SELF" else ins)
    tail = GuestProgram(tuple(body))
    quoted = GuestProgram((Instr("QUOTE", (SELF_REG,)),) + relocate(tail, 1))
    return smn(quoted, encode(quoted), register=SELF_REG)


def make_bounded_decider(T: int) -> GuestProgram:
    """D_T: does the program in r0, run on its own encoding, halt within T steps?

    Halts at step min(K, T) + 4 and emits one verdict.  Input that does not
    decode is run as a non-halting program, so D_T answers DOES_NOT_HALT after
    spending its whole budget.
    """
    if not isinstance(T, int) or T < 0:
        raise ValueError("T must be a non-negative integer")
    instrs = (
        Instr("LOAD", (1, T)),
        Instr("EXEC", (0, 0, 1)),
        Instr("JZ", (STATUS_REG, 5)),
        Instr("EMIT", (GuestVerdict.HALTS,)),
        Instr("HALT"),
        Instr("EMIT", (GuestVerdict.DOES_NOT_HALT,)),
        Instr("HALT"),
    )
    return GuestProgram(instrs, cost_bound=T + 4)


def make_constant_decider(verdict: GuestVerdict) -> GuestProgram:
    return GuestProgram((Instr("EMIT", (verdict,)), Instr("HALT")), cost_bound=1)


def make_diagonalizer(decider: GuestProgram, slack: int = 1) -> GuestProgram:
    """X: run ``decider`` on <X>, then halt iff it said DOES_NOT_HALT.

    The inner budget is the decider's declared cost bound plus ``slack``.
    Raises ValueError if the decider does not emit a verdict within it.
    """
    if decider.cost_bound is None:
        raise ValueError("decider must declare a cost bound")
    budget = decider.cost_bound + slack
    template = GuestProgram(
        (
            Instr("SELF", (1,)),
            Instr("LOAD", (2, encode(decider))),
            Instr("LOAD", (3, budget)),
            Instr("EXEC", (2, 1, 3)),
            Instr("JZ", (OUTPUT_REG, 6)),
            Instr("LOOP"),
            Instr("HALT"),
        )
    )
    x = quine_transform(template)
    run = execute(decider, encode(x), budget)
    if not isinstance(run.verdict, HaltsAt) or not isinstance(run.output, GuestVerdict):
        raise ValueError(f"decider emitted no verdict on <X> within its budget of {budget} steps")
    return x


__all__ = [
    "GuestProgram",
    "GuestVerdict",
    "GuestConfig",
    "Instr",
    "Reg",
    "assemble",
    "decode",
    "encode",
    "execute",
    "load_program",
    "make_bounded_decider",
    "make_constant_decider",
    "make_diagonalizer",
    "quine_transform",
    "reaches_loop",
    "run_bounded",
    "smn",
]
