"""Halting as a limit of finite observations: machines, the observation
domain, the operator F and its Kleene chain, and an experiment harness."""

from .domain import (
    BOT,
    BOTTOM,
    ZERO,
    LubConflict,
    OneTailFrom,
    PartialObservation,
    format_observation,
    in_bounded_class,
    join,
    leq,
    lub,
    observation,
    parse_observation,
)
from .fixpoint import (
    ChainRecord,
    FuelExhausted,
    HaltingOperator,
    StillRunning,
    apply_F,
    is_fixed_point,
    iterate_chain,
    make_p_omega,
    semidecide_halts,
)
from .guest import (
    GuestProgram,
    GuestVerdict,
    assemble,
    make_bounded_decider,
    make_diagonalizer,
    quine_transform,
    smn,
)
from .machine import CostLedger, HaltsAt, Machine, RunningAt, halts_at_exact, run_bounded
from .tm import MachineSpec, enumerate_machines, parse_machine

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
