"""The halting-observation operator F, its Kleene chain and fixed points.

F(p)(0) records whether the machine has halted at step 0.  For k >= 0,
F(p)(k+1) looks only at p(k):

    p(k) = ⊥  ->  ⊥
    p(k) = 1  ->  1
    p(k) = 0  ->  1 if the machine has halted by step k+1, else 0

When p(k) = 0 is consistent with the run (no halt by step k) the last case
is exactly "halts at step k+1".  Reading it as "halted by k+1" also keeps F
inside the monotone domain for observations that contradict the run.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Any, Union

from .domain import (
    BOT,
    BOTTOM,
    ZERO,
    Bit,
    BottomTail,
    InvalidObservation,
    OneTailFrom,
    PartialObservation,
    ZeroTailClaim,
    halting_observation,
    leq,
)
from .machine import CostLedger, HaltsAt, Machine, RunningAt, RunVerdict

DEFAULT_WINDOW = 64
DEFAULT_CHAIN_CAP = 256


class HaltingProbe:
    """Memoised halting queries against one (machine, input) run.

    Answers match :func:`haltlab.machine.run_bounded`; the simulation is only
    ever extended, never repeated.
    """

    def __init__(self, machine: Machine, input: Any):
        self.machine = machine
        self.input = input
        self._trace = machine.halting_trace(input)
        self._frontier = -1
        self.halt_step: int | None = None

    def _extend(self, k: int) -> None:
        while self.halt_step is None and self._frontier < k:
            halted = next(self._trace)
            self._frontier += 1
            if halted:
                self.halt_step = self._frontier

    def halt_step_within(self, k: int) -> int | None:
        self._extend(k)
        if self.halt_step is not None and self.halt_step <= k:
            return self.halt_step
        return None

    def halts_at_exact(self, k: int) -> bool:
        return self.halt_step_within(k) == k

    def halted_by(self, k: int) -> bool:
        if self.halt_step is not None:
            return k >= self.halt_step
        if k <= self._frontier:
            return False
        return self.halt_step_within(k) is not None

    def run_bounded(self, T: int) -> tuple[RunVerdict, CostLedger]:
        K = self.halt_step_within(T)
        if K is not None:
            return HaltsAt(K), CostLedger(K, 1)
        return RunningAt(T), CostLedger(T, 1)


class HaltingOperator:
    """F for a fixed machine and input.

    Zero-tail claims are expanded over ``window`` indices; past the window the
    table is evaluated once more and its answer becomes the new tail.
    """

    def __init__(self, machine: Machine, input: Any = None, window: int = DEFAULT_WINDOW):
        if window < 1:
            raise ValueError("window must be at least 1")
        if input is None:
            input = machine.default_input()
        self.machine = machine
        self.input = input
        self.window = window
        self.probe = HaltingProbe(machine, input)
        self._last: tuple[PartialObservation, PartialObservation] | None = None

    def base(self) -> int:
        return 1 if self.probe.halted_by(0) else 0

    def successor(self, k: int, pk: Bit) -> Bit:
        if pk is None:
            return None
        if pk == 1:
            return 1
        return 1 if self.probe.halted_by(k + 1) else 0

    def __call__(self, p: PartialObservation) -> PartialObservation:
        # chains apply F to the same value twice in a row (next stage, then
        # the fixed-point check), so remember the last answer
        last = self._last
        if last is not None and last[0] is p:
            return last[1]
        image = self._apply(p)
        self._last = (p, image)
        return image

    def _apply(self, p: PartialObservation) -> PartialObservation:
        h = p.horizon
        successor = self.successor
        out: dict[int, int] = {0: self.base()}
        if len(p.entries) == h:
            # no holes below the horizon: entries are p(0..h-1) in order
            for k, v in p.entries:
                out[k + 1] = successor(k, v)
        else:
            lookup = p.lookup
            for j in range(1, h + 1):
                v = successor(j - 1, lookup(j - 1))
                if v is not None:
                    out[j] = v
        if isinstance(p.tail, BottomTail):
            tail = BOTTOM
        elif isinstance(p.tail, OneTailFrom):
            tail = OneTailFrom(h + 1)
        else:
            last = max(self.window, h + 1)
            for j in range(h + 1, last + 1):
                out[j] = successor(j - 1, 0)
            tail = ZERO if successor(last, 0) == 0 else OneTailFrom(last + 1)
        return PartialObservation(out, tail)


def apply_F(machine: Machine, input: Any, p: PartialObservation, window: int = DEFAULT_WINDOW) -> PartialObservation:
    return HaltingOperator(machine, input, window)(p)


@dataclass(frozen=True)
class ChainRecord:
    machine: Machine
    input: Any
    stages: tuple[PartialObservation, ...]
    ledger_per_stage: tuple[CostLedger, ...]


def iterate_chain(machine: Machine, input: Any, N: int, *, operator: HaltingOperator | None = None) -> ChainRecord:
    """p_0 = ⊥, p_{i+1} = F(p_i) for i < N.

    Stage i needs the run up to step i-1, so its ledger is that of a bounded
    run with bound i-1 (empty for stage 0).
    """
    if N < 0:
        raise ValueError("stage count must be non-negative")
    op = operator or HaltingOperator(machine, input)
    stages = [BOT]
    ledgers = [CostLedger()]
    for i in range(1, N + 1):
        stages.append(op(stages[-1]))
        ledgers.append(op.probe.run_bounded(i - 1)[1])
    return ChainRecord(machine, op.input, tuple(stages), tuple(ledgers))


@dataclass(frozen=True)
class FixedPointCheck:
    fixed: bool
    witness: int | None = None

    def __bool__(self) -> bool:
        return self.fixed


def check_fixed_point(op: HaltingOperator, p: PartialObservation) -> FixedPointCheck:
    image = op(p)
    if p.is_bounded:
        # F(p) is always defined at the horizon, where p is not.
        h = p.horizon
        if image.lookup(h) is None or p.lookup(h) is not None:
            raise AssertionError(f"F failed to extend {p} at index {h}")
        return FixedPointCheck(False, h)
    if image == p:
        return FixedPointCheck(True)
    h = max(p.horizon, image.horizon)
    for k in range(h + op.window):
        if image.lookup(k) != p.lookup(k):
            return FixedPointCheck(False, k)
    return FixedPointCheck(False, h)


def is_fixed_point(
    machine: Machine, input: Any, p: PartialObservation, window: int = DEFAULT_WINDOW
) -> FixedPointCheck:
    """F(p) == p, structurally on tails and pointwise on the window."""
    return check_fixed_point(HaltingOperator(machine, input, window), p)


@dataclass(frozen=True)
class StillRunning:
    fuel: int


def make_p_omega(machine: Machine, input: Any, fuel: int) -> Union[PartialObservation, StillRunning]:
    """The limit of the chain when the machine halts within ``fuel`` steps.

    Never fabricates a zero-tail claim for a run that is merely still going.
    """
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    K = HaltingProbe(machine, input).halt_step_within(fuel)
    if K is None:
        return StillRunning(fuel)
    return halting_observation(K)


@dataclass(frozen=True)
class FuelExhausted:
    last: int


def semidecide_halts(machine: Machine, input: Any, fuel_schedule: Sequence[int]) -> Union[HaltsAt, FuelExhausted]:
    """Positive answers only: ``HaltsAt(K)`` or ``FuelExhausted(last fuel)``."""
    schedule = list(fuel_schedule)
    if not schedule:
        raise ValueError("empty fuel schedule")
    if schedule[0] < 0 or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("fuel schedule must be non-negative and strictly increasing")
    probe = HaltingProbe(machine, input)
    for fuel in schedule:
        K = probe.halt_step_within(fuel)
        if K is not None:
            return HaltsAt(K)
    return FuelExhausted(schedule[-1])


# -- fixed-point search over a finite window ----------------------------------


def _tails(n: int) -> list:
    return [BOTTOM, ZERO] + [OneTailFrom(t) for t in range(n + 1)]


def _free_positions(tail, n: int) -> range:
    if isinstance(tail, ZeroTailClaim):
        return range(0)
    if isinstance(tail, OneTailFrom):
        return range(min(n, tail.start))
    return range(n)


def candidate_observations(n: int) -> Iterable[PartialObservation]:
    """Every valid observation with entries on 0..n-1 and any tail starting by n."""
    seen = set()
    for tail in _tails(n):
        positions = _free_positions(tail, n)
        for bits in itertools.product((None, 0, 1), repeat=len(positions)):
            try:
                q = PartialObservation(tuple(zip(positions, bits)), tail)
            except InvalidObservation:
                continue
            if q not in seen:
                seen.add(q)
                yield q


def fixed_points_exhaustive(op: HaltingOperator, n: int) -> list[PartialObservation]:
    return [q for q in candidate_observations(n) if check_fixed_point(op, q)]


def fixed_points_pruned(op: HaltingOperator, n: int) -> list[PartialObservation]:
    """Same search space as :func:`fixed_points_exhaustive`, depth-first.

    A branch is cut as soon as an assigned index disagrees with F at that
    index; F at j reads only index j-1, so no fixed point is lost.
    """
    found = []
    for tail in _tails(n):
        positions = list(_free_positions(tail, n))

        def extend(prefix: list[Bit]) -> None:
            j = len(prefix)
            if j == len(positions):
                try:
                    q = PartialObservation(tuple(zip(positions, prefix)), tail)
                except InvalidObservation:
                    return
                if q not in found and check_fixed_point(op, q):
                    found.append(q)
                return
            for v in (None, 0, 1):
                want = op.base() if j == 0 else op.successor(j - 1, prefix[j - 1])
                if v == want:
                    extend(prefix + [v])

        extend([])
    return found


def strictly_less(p: PartialObservation, q: PartialObservation) -> bool:
    return leq(p, q) and p != q
