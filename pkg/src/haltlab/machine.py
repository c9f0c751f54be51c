"""Model-agnostic machine interface, bounded runs and tick accounting.

Every concrete device (Turing machines in :mod:`haltlab.tm`, guest programs in
:mod:`haltlab.guest`) implements :class:`Machine`.  Everything above this layer
only ever asks "did the machine halt at exactly step k?", so the operator and
the harness never look inside a configuration.

Tick model: one tick per transition actually followed, plus one tick for
emitting a verdict.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Iterator
from dataclasses import dataclass
from typing import Any, Union


@dataclass(frozen=True)
class Running:
    next: Any


@dataclass(frozen=True)
class Halted:
    pass


StepOutcome = Union[Running, Halted]


@dataclass(frozen=True)
class HaltsAt:
    step: int

    def __str__(self) -> str:
        return f"HALTS at {self.step}"


@dataclass(frozen=True)
class RunningAt:
    step: int

    def __str__(self) -> str:
        return f"RUNNING at {self.step}"


RunVerdict = Union[HaltsAt, RunningAt]


@dataclass(frozen=True)
class CostLedger:
    simulated_steps: int = 0
    verdict_ticks: int = 0

    def __post_init__(self):
        if self.simulated_steps < 0 or self.verdict_ticks < 0:
            raise ValueError("tick counts must be non-negative")

    @property
    def total(self) -> int:
        return self.simulated_steps + self.verdict_ticks

    def as_dict(self) -> dict[str, int]:
        return {
            "simulated_steps": self.simulated_steps,
            "verdict_ticks": self.verdict_ticks,
            "total": self.total,
        }


class MachineError(ValueError):
    """A configuration or description that is invalid for its machine."""


class Machine(ABC):
    """A deterministic device with discrete step semantics.

    Subclasses provide ``initial`` and ``step``.  ``halting_trace`` may be
    overridden with a faster simulation as long as it agrees with ``step``.
    """

    @abstractmethod
    def initial(self, input: Any) -> Any:
        """Configuration c_0 for the given input."""

    @abstractmethod
    def step(self, config: Any) -> StepOutcome:
        """``Halted`` if *config* is halting, else ``Running(c_{t+1})``."""

    def default_input(self) -> Any:
        """Input used when none is given: the machine's own encoding."""
        raise NotImplementedError

    def halting_trace(self, input: Any) -> Iterator[bool]:
        """Yield, for c_0, c_1, ..., whether that configuration is halting.

        The iterator stops right after yielding ``True``.
        """
        config = self.initial(input)
        while True:
            outcome = self.step(config)
            if isinstance(outcome, Halted):
                yield True
                return
            yield False
            config = outcome.next


def _check_bound(T: int) -> None:
    if not isinstance(T, int) or isinstance(T, bool) or T < 0:
        raise ValueError(f"step bound must be a non-negative integer, got {T!r}")


def run_bounded(machine: Machine, input: Any, T: int) -> tuple[RunVerdict, CostLedger]:
    """Simulate at most T transitions and emit a verdict.

    Returns ``HaltsAt(k)`` when c_k is the first halting configuration and
    k <= T, otherwise ``RunningAt(T)``.  The ledger charges min(k, T)
    transitions plus one verdict tick, so a non-halting run costs exactly T+1.
    """
    _check_bound(T)
    for t, halted in enumerate(machine.halting_trace(input)):
        if halted:
            return HaltsAt(t), CostLedger(t, 1)
        if t == T:
            break
    return RunningAt(T), CostLedger(T, 1)


def halts_at_exact(machine: Machine, input: Any, k: int) -> bool:
    _check_bound(k)
    verdict, _ = run_bounded(machine, input, k)
    return verdict == HaltsAt(k)


def configurations(machine: Machine, input: Any, limit: int) -> list:
    """c_0 .. c_j with j < limit, stopping after the first halting one."""
    out = []
    config = machine.initial(input)
    for _ in range(limit):
        out.append(config)
        outcome = machine.step(config)
        if isinstance(outcome, Halted):
            break
        config = outcome.next
    return out
