"""Monotone partial observations ordered by extension.

An observation maps step indices to 0 ("not halted by step k"), 1 ("halted
at or before step k") or ⊥ (``None``).  A finite table of entries is followed
by a symbolic tail:

* ``BOTTOM`` -- undefined beyond the entries,
* ``ZERO`` -- a *claim* that every remaining index is 0,
* ``OneTailFrom(K)`` -- 1 at every index >= K.

Values are kept in canonical form, so ``==`` is equality of lookup functions.
Text form: ``[0 0 _ 1 | ⊥]``, ``[| 0…]``, ``[0 0 | 1…@2]``.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import Optional, Union

Bit = Optional[int]


@dataclass(frozen=True)
class BottomTail:
    def __str__(self) -> str:
        return "⊥"


@dataclass(frozen=True)
class ZeroTailClaim:
    def __str__(self) -> str:
        return "0…"


@dataclass(frozen=True)
class OneTailFrom:
    start: int

    def __post_init__(self):
        if self.start < 0:
            raise ValueError("tail start must be non-negative")

    def __str__(self) -> str:
        return f"1…@{self.start}"


Tail = Union[BottomTail, ZeroTailClaim, OneTailFrom]
BOTTOM = BottomTail()
ZERO = ZeroTailClaim()


class InvalidObservation(ValueError):
    def __init__(self, message: str, index: int | None = None):
        self.index = index
        super().__init__(message)


class LubConflict(ValueError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"incompatible observations at index {index}")


@dataclass(frozen=True)
class PartialObservation:
    entries: tuple[tuple[int, int], ...] = ()
    tail: Tail = BOTTOM

    def __post_init__(self):
        raw = self.entries.items() if isinstance(self.entries, Mapping) else self.entries
        table: dict[int, int] = {}
        for k, v in raw:
            if v is None:
                continue
            if type(k) is not int or k < 0:
                raise InvalidObservation(f"bad index {k!r}", k if isinstance(k, int) else None)
            if v != 0 and v != 1:
                raise InvalidObservation(f"value at {k} must be 0, 1 or None", k)
            if table.setdefault(k, v) != v:
                raise InvalidObservation(f"two values at index {k}", k)
        tail = self.tail
        if tail.__class__ not in (BottomTail, ZeroTailClaim, OneTailFrom):
            raise InvalidObservation(f"bad tail {tail!r}")

        keys = sorted(table)
        first_one = None
        for k in keys:
            if table[k] == 1:
                if first_one is None:
                    first_one = k
            elif first_one is not None:
                raise InvalidObservation(f"0 at {k} after 1 at {first_one}", k)

        if tail.__class__ is OneTailFrom:
            start = tail.start
            if keys and table[keys[-1]] == 0 and keys[-1] >= start:
                raise InvalidObservation(f"0 at {keys[-1]} inside the 1-tail from {start}", keys[-1])
            while table.get(start - 1) == 1:
                start -= 1
            if start != tail.start:
                tail = OneTailFrom(start)
            while keys and keys[-1] >= start:
                del table[keys.pop()]
        elif tail.__class__ is ZeroTailClaim:
            if first_one is not None:
                raise InvalidObservation(f"zero-tail claim after 1 at {first_one}", keys[-1] + 1)
            table = {}
            keys = []

        object.__setattr__(self, "entries", tuple((k, table[k]) for k in keys))
        object.__setattr__(self, "tail", tail)
        object.__setattr__(self, "_table", table)

    # -- lookups -----------------------------------------------------------

    def __call__(self, k: int) -> Bit:
        return self.lookup(k)

    def lookup(self, k: int) -> Bit:
        v = self._table.get(k)
        return tail_value(self.tail, k) if v is None else v

    def table(self) -> dict[int, int]:
        return dict(self._table)

    @property
    def horizon(self) -> int:
        """Smallest H such that every index >= H reads the tail's constant value."""
        h = self.entries[-1][0] + 1 if self.entries else 0
        if isinstance(self.tail, OneTailFrom):
            h = max(h, self.tail.start)
        return h

    @property
    def is_bounded(self) -> bool:
        return isinstance(self.tail, BottomTail)

    def defined_indices(self) -> list[int]:
        if not self.is_bounded:
            raise ValueError("observation with a tail is defined on infinitely many indices")
        return [k for k, _ in self.entries]

    def prefix(self, n: int) -> list[Bit]:
        return [self.lookup(k) for k in range(n)]

    def __str__(self) -> str:
        return format_observation(self)


BOT = PartialObservation()


def tail_value(tail: Tail, k: int) -> Bit:
    if isinstance(tail, ZeroTailClaim):
        return 0
    if isinstance(tail, OneTailFrom) and k >= tail.start:
        return 1
    return None


def observation(bits: Iterable[Bit] = (), tail: Tail = BOTTOM) -> PartialObservation:
    """Build from a positional list; ``None`` marks a hole."""
    return PartialObservation(tuple((k, v) for k, v in enumerate(bits) if v is not None), tail)


def halting_observation(k: int) -> PartialObservation:
    """Zeros on 0..k-1 followed by a 1-tail from k."""
    return PartialObservation(tuple((i, 0) for i in range(k)), OneTailFrom(k))


def _tail_leq(a: Tail, b: Tail) -> bool:
    if isinstance(a, BottomTail):
        return True
    if isinstance(a, ZeroTailClaim):
        return isinstance(b, ZeroTailClaim)
    return isinstance(b, OneTailFrom)


def leq(p: PartialObservation, q: PartialObservation) -> bool:
    """p ⊑ q: q agrees with p wherever p is defined."""
    h = max(p.horizon, q.horizon)
    for k in range(h):
        v = p.lookup(k)
        if v is not None and q.lookup(k) != v:
            return False
    return _tail_leq(p.tail, q.tail)


def lub(observations: Iterable[PartialObservation]) -> PartialObservation:
    """Least upper bound of a finite compatible family; raises LubConflict."""
    obs = list(observations)
    if not obs:
        return BOT
    h = max(p.horizon for p in obs)
    table: dict[int, int] = {}
    for k in range(h):
        for p in obs:
            v = p.lookup(k)
            if v is None:
                continue
            if table.setdefault(k, v) != v:
                raise LubConflict(k)
    has_zero = any(isinstance(p.tail, ZeroTailClaim) for p in obs)
    has_one = any(isinstance(p.tail, OneTailFrom) for p in obs)
    if has_zero and has_one:
        raise LubConflict(h)
    tail: Tail = ZERO if has_zero else OneTailFrom(h) if has_one else BOTTOM
    try:
        return PartialObservation(tuple(table.items()), tail)
    except InvalidObservation as exc:
        raise LubConflict(exc.index if exc.index is not None else h) from exc


def join(p: PartialObservation, q: PartialObservation) -> PartialObservation:
    return lub((p, q))


def is_directed(observations: Iterable[PartialObservation]) -> bool:
    obs = list(observations)
    for i, p in enumerate(obs):
        for q in obs[i + 1 :]:
            if not any(leq(p, r) and leq(q, r) for r in obs):
                return False
    return True


def in_bounded_class(p: PartialObservation, T: int) -> bool:
    """Membership in B_T: bottom tail and defined only below T."""
    return p.is_bounded and all(k < T for k, _ in p.entries)


def monotone_observations(n: int) -> Iterator[PartialObservation]:
    """Every bottom-tailed observation whose defined indices lie in 0..n-1."""
    for bits in itertools.product((None, 0, 1), repeat=n):
        seen_one = False
        ok = True
        for v in bits:
            if v == 1:
                seen_one = True
            elif v == 0 and seen_one:
                ok = False
                break
        if ok:
            yield observation(bits)


# -- text form ---------------------------------------------------------------

_TAIL_WORDS = {"⊥": BOTTOM, "bot": BOTTOM, "_|_": BOTTOM, "0…": ZERO, "0...": ZERO}


def format_observation(p: PartialObservation) -> str:
    table = p.table()
    n = p.entries[-1][0] + 1 if p.entries else 0
    cells = " ".join("_" if table.get(k) is None else str(table[k]) for k in range(n))
    return f"[{cells} | {p.tail}]" if cells else f"[| {p.tail}]"


def parse_observation(text: str) -> PartialObservation:
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")) or "|" not in s:
        raise InvalidObservation(f"expected '[bits | tail]', got {text!r}")
    body, _, tail_text = s[1:-1].rpartition("|")
    tail_text = tail_text.strip()
    if tail_text in _TAIL_WORDS:
        tail: Tail = _TAIL_WORDS[tail_text]
    else:
        norm = tail_text.replace("...", "…")
        if not norm.startswith("1…@"):
            raise InvalidObservation(f"bad tail {tail_text!r}")
        try:
            tail = OneTailFrom(int(norm[3:]))
        except ValueError as exc:
            raise InvalidObservation(f"bad tail {tail_text!r}") from exc
    bits: list[Bit] = []
    for tok in body.split():
        if tok == "_":
            bits.append(None)
        elif tok in ("0", "1"):
            bits.append(int(tok))
        else:
            raise InvalidObservation(f"bad cell {tok!r}")
    return observation(bits, tail)
