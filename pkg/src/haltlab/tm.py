"""Single-tape deterministic Turing machines.

Text format (UTF-8, one item per line, ``#`` starts a comment)::

    states: q0 q1 qh
    alphabet: _ 1
    blank: _
    start: q0
    halt: qh
    q0 _ -> q1 _ R
    q1 _ -> qh _ R

The binary encoding is described in ``docs/formats.md``.
"""

from __future__ import annotations

import itertools
import struct
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field

from .machine import Halted, Machine, MachineError, Running, StepOutcome

MOVES = ("L", "R", "S")
_DELTA = {"L": -1, "R": 1, "S": 0}

MAGIC = b"TM"
VERSION = 1
_HEADER = struct.Struct(">2sBI")


class ParseError(MachineError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class MalformedEncoding(MachineError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"byte {offset}: {message}")


@dataclass(frozen=True)
class Configuration:
    tape: tuple[tuple[int, str], ...]
    head: int
    state: str
    step: int = 0

    def __post_init__(self):
        if self.step < 0:
            raise MachineError("step index must be non-negative")

    def tape_dict(self) -> dict[int, str]:
        return dict(self.tape)


@dataclass(frozen=True)
class MachineSpec(Machine):
    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    blank: str
    start: str
    halt_states: frozenset[str]
    transitions: Mapping[tuple[str, str], tuple[str, str, str]] = field(hash=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "halt_states", frozenset(self.halt_states))
        object.__setattr__(self, "transitions", dict(self.transitions))
        validate(self)

    @property
    def running_states(self) -> tuple[str, ...]:
        return tuple(q for q in self.states if q not in self.halt_states)

    # -- Machine interface -------------------------------------------------

    def initial(self, input: Sequence[str] = ()) -> Configuration:
        tape = []
        for i, sym in enumerate(input):
            if sym not in self.alphabet:
                raise MachineError(f"input symbol {sym!r} not in alphabet")
            if sym != self.blank:
                tape.append((i, sym))
        return Configuration(tuple(tape), 0, self.start, 0)

    def step(self, config: Configuration) -> StepOutcome:
        if config.state not in self.states:
            raise MachineError(f"unknown state {config.state!r}")
        if config.state in self.halt_states:
            return Halted()
        tape = dict(config.tape)
        read = tape.get(config.head, self.blank)
        if read not in self.alphabet:
            raise MachineError(f"tape symbol {read!r} not in alphabet")
        nxt, write, move = self.transitions[(config.state, read)]
        if write == self.blank:
            tape.pop(config.head, None)
        else:
            tape[config.head] = write
        return Running(
            Configuration(
                tuple(sorted(tape.items())),
                config.head + _DELTA[move],
                nxt,
                config.step + 1,
            )
        )

    def default_input(self) -> tuple[str, ...]:
        return self_input(self)

    def halting_trace(self, input: Sequence[str] = ()) -> Iterator[bool]:
        # Same semantics as step(), with a private mutable tape.
        start = self.initial(input)
        tape = dict(start.tape)
        head, state = 0, self.start
        halts = self.halt_states
        delta = {k: (q, s, _DELTA[m]) for k, (q, s, m) in self.transitions.items()}
        blank = self.blank
        while True:
            if state in halts:
                yield True
                return
            yield False
            state, write, d = delta[(state, tape.get(head, blank))]
            if write == blank:
                tape.pop(head, None)
            else:
                tape[head] = write
            head += d


def validate(spec: MachineSpec) -> None:
    if len(set(spec.states)) != len(spec.states):
        raise ParseError("duplicate state name")
    if len(set(spec.alphabet)) != len(spec.alphabet):
        raise ParseError("duplicate alphabet symbol")
    if spec.blank not in spec.alphabet:
        raise ParseError(f"blank {spec.blank!r} not in alphabet")
    if spec.start not in spec.states:
        raise ParseError(f"unknown start state {spec.start!r}")
    for q in spec.halt_states:
        if q not in spec.states:
            raise ParseError(f"unknown halt state {q!r}")
    for (q, s), (q2, s2, m) in spec.transitions.items():
        if q not in spec.states or q2 not in spec.states:
            raise ParseError(f"unknown state in rule {q} {s} -> {q2} {s2} {m}")
        if s not in spec.alphabet or s2 not in spec.alphabet:
            raise ParseError(f"unknown symbol in rule {q} {s} -> {q2} {s2} {m}")
        if m not in MOVES:
            raise ParseError(f"bad move {m!r}")
        if q in spec.halt_states:
            raise ParseError(f"halt state {q!r} has an outgoing transition")
    for q in spec.running_states:
        for s in spec.alphabet:
            if (q, s) not in spec.transitions:
                raise ParseError(f"missing transition for ({q}, {s})")


# -- text format ----------------------------------------------------------

_HEADERS = ("states", "alphabet", "blank", "start", "halt")


def parse_machine(text: str) -> MachineSpec:
    header: dict[str, list[str]] = {}
    rules: dict[tuple[str, str], tuple[str, str, str]] = {}
    rule_lines: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            lhs, _, rhs = line.partition("->")
            rule_lines.append((lineno, lhs.split() + ["->"] + rhs.split()))
            continue
        key, sep, rest = line.partition(":")
        key = key.strip().lower()
        if not sep or key not in _HEADERS:
            raise ParseError(f"cannot parse {raw.strip()!r}", lineno)
        if key in header:
            raise ParseError(f"duplicate header {key!r}", lineno)
        header[key] = rest.replace(",", " ").split()

    for key in _HEADERS:
        if key != "halt" and key not in header:
            raise ParseError(f"missing header {key!r}")
    for key in ("blank", "start"):
        if len(header[key]) != 1:
            raise ParseError(f"{key!r} takes exactly one value")
    states = header["states"]
    alphabet = header["alphabet"]
    halt = header.get("halt", [])

    for lineno, toks in rule_lines:
        if len(toks) != 6 or toks[2] != "->":
            raise ParseError("expected 'state symbol -> state symbol move'", lineno)
        q, s, _, q2, s2, m = toks
        m = m.upper()
        for name in (q, q2):
            if name not in states:
                raise ParseError(f"unknown state {name!r}", lineno)
        for sym in (s, s2):
            if sym not in alphabet:
                raise ParseError(f"unknown symbol {sym!r}", lineno)
        if m not in MOVES:
            raise ParseError(f"bad move {m!r}", lineno)
        if (q, s) in rules:
            raise ParseError(f"nondeterministic: second rule for ({q}, {s})", lineno)
        if q in halt:
            raise ParseError(f"halt state {q!r} has an outgoing transition", lineno)
        rules[(q, s)] = (q2, s2, m)

    return MachineSpec(
        states=tuple(states),
        alphabet=tuple(alphabet),
        blank=header["blank"][0],
        start=header["start"][0],
        halt_states=frozenset(halt),
        transitions=rules,
    )


def format_machine(spec: MachineSpec) -> str:
    lines = [
        f"states: {' '.join(spec.states)}",
        f"alphabet: {' '.join(spec.alphabet)}",
        f"blank: {spec.blank}",
        f"start: {spec.start}",
        f"halt: {' '.join(q for q in spec.states if q in spec.halt_states)}",
    ]
    si = {q: i for i, q in enumerate(spec.states)}
    ai = {s: i for i, s in enumerate(spec.alphabet)}
    for (q, s), (q2, s2, m) in sorted(spec.transitions.items(), key=lambda kv: (si[kv[0][0]], ai[kv[0][1]])):
        lines.append(f"{q} {s} -> {q2} {s2} {m}")
    return "\n".join(lines) + "\n"


# -- canonical binary encoding --------------------------------------------


def encode(spec: MachineSpec) -> bytes:
    si = {q: i for i, q in enumerate(spec.states)}
    ai = {s: i for i, s in enumerate(spec.alphabet)}
    if len(si) > 255 or len(ai) > 255:
        raise MachineError("encoding supports at most 255 states and symbols")
    halts = sorted(si[q] for q in spec.halt_states)
    rows = sorted(
        (si[q], ai[s], si[q2], ai[s2], MOVES.index(m))
        for (q, s), (q2, s2, m) in spec.transitions.items()
    )
    payload = bytearray([len(si), len(ai), ai[spec.blank], si[spec.start], len(halts)])
    payload += bytes(halts)
    payload += struct.pack(">H", len(rows))
    for row in rows:
        payload += bytes(row)
    return _HEADER.pack(MAGIC, VERSION, len(payload)) + bytes(payload)


def decode(data: bytes) -> MachineSpec:
    data = bytes(data)
    if len(data) < _HEADER.size:
        raise MalformedEncoding("truncated header", len(data))
    magic, version, length = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise MalformedEncoding("bad magic", 0)
    if version != VERSION:
        raise MalformedEncoding(f"unsupported version {version}", 2)
    end = _HEADER.size + length
    if len(data) < end:
        raise MalformedEncoding(f"payload truncated (need {length} bytes)", len(data))
    if len(data) > end:
        raise MalformedEncoding("trailing bytes", end)

    pos = _HEADER.size

    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > end:
            raise MalformedEncoding("payload truncated", pos)
        chunk = data[pos : pos + n]
        pos += n
        return chunk

    n_states, n_symbols, blank, start, n_halt = take(5)
    if blank >= n_symbols:
        raise MalformedEncoding("blank index out of range", _HEADER.size + 2)
    if start >= n_states:
        raise MalformedEncoding("start index out of range", _HEADER.size + 3)
    halt_at = pos
    halts = list(take(n_halt))
    if any(h >= n_states for h in halts) or halts != sorted(set(halts)):
        raise MalformedEncoding("bad halt state list", halt_at)
    (n_rows,) = struct.unpack(">H", take(2))
    states = tuple(f"q{i}" for i in range(n_states))
    alphabet = tuple(str(i) for i in range(n_symbols))
    rules = {}
    prev = None
    for _ in range(n_rows):
        at = pos
        q, s, q2, s2, m = take(5)
        if max(q, q2) >= n_states or max(s, s2) >= n_symbols or m >= len(MOVES):
            raise MalformedEncoding("transition field out of range", at)
        if prev is not None and (q, s) <= prev:
            raise MalformedEncoding("transitions not in canonical order", at)
        prev = (q, s)
        rules[(states[q], alphabet[s])] = (states[q2], alphabet[s2], MOVES[m])
    try:
        return MachineSpec(
            states=states,
            alphabet=alphabet,
            blank=alphabet[blank],
            start=states[start],
            halt_states=frozenset(states[h] for h in halts),
            transitions=rules,
        )
    except ParseError as exc:
        raise MalformedEncoding(str(exc), pos) from exc


def canonical(spec: MachineSpec) -> MachineSpec:
    """Rename states to q0.. and symbols to 0.. by their declared order."""
    return decode(encode(spec))


def self_input(spec: MachineSpec) -> tuple[str, ...]:
    """The tape word for <spec>: encoding bits, most significant first.

    With two or more non-blank symbols, bits map to the first two of them;
    with one, 0 maps to blank and 1 to that symbol.
    """
    nonblank = [s for s in spec.alphabet if s != spec.blank]
    if len(nonblank) >= 2:
        zero, one = nonblank[0], nonblank[1]
    elif nonblank:
        zero, one = spec.blank, nonblank[0]
    else:
        zero = one = spec.blank
    word = []
    for byte in encode(spec):
        for bit in range(7, -1, -1):
            word.append(one if (byte >> bit) & 1 else zero)
    return tuple(word)


# -- exhaustive enumeration -------------------------------------------------

ENUMERATION_GUARD = (3, 2)
HALT_STATE = "qh"


def enumeration_count(n_states: int, n_symbols: int) -> int:
    if n_states <= 0 or n_symbols <= 0:
        return 0
    per_key = n_states * n_symbols * len(MOVES) + 1
    return per_key ** (n_states * n_symbols)


def enumerate_machines(n_states: int, n_symbols: int, *, override: bool = False) -> Iterator[MachineSpec]:
    """Every total machine with states q0..q{n-1}, symbols 0..m-1 and halt state qh.

    Each (state, symbol) key either moves to a running state with any write and
    move, or enters ``qh`` (writing the read symbol back and moving R).
    """
    if not override and (n_states > ENUMERATION_GUARD[0] or n_symbols > ENUMERATION_GUARD[1]):
        raise ValueError(
            f"enumeration of ({n_states}, {n_symbols}) exceeds guard {ENUMERATION_GUARD}; pass override=True"
        )
    if n_states <= 0 or n_symbols <= 0:
        return
    states = tuple(f"q{i}" for i in range(n_states))
    alphabet = tuple(str(i) for i in range(n_symbols))
    keys = [(q, s) for q in states for s in alphabet]
    running = list(itertools.product(states, alphabet, MOVES))
    for choice in itertools.product(range(len(running) + 1), repeat=len(keys)):
        rules = {}
        for (q, s), c in zip(keys, choice):
            rules[(q, s)] = (HALT_STATE, s, "R") if c == 0 else running[c - 1]
        yield MachineSpec(
            states=states + (HALT_STATE,),
            alphabet=alphabet,
            blank=alphabet[0],
            start=states[0],
            halt_states=frozenset([HALT_STATE]),
            transitions=rules,
        )
