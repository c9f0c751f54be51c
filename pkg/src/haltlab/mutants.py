"""Deliberately broken variants of F, used to check that the suite can fail."""

from __future__ import annotations

from .domain import Bit
from .fixpoint import HaltingOperator


class SwappedZeroBranch(HaltingOperator):
    """The p(k) = 0 branch answers 0 where it should answer 1, and vice versa."""

    def successor(self, k: int, pk: Bit) -> Bit:
        if pk == 0:
            return 0 if self.probe.halted_by(k + 1) else 1
        return super().successor(k, pk)


class NoBottomPropagation(HaltingOperator):
    """A hole in p is read as 0 instead of being passed on as ⊥."""

    def successor(self, k: int, pk: Bit) -> Bit:
        return super().successor(k, 0 if pk is None else pk)


class BaseOffByOne(HaltingOperator):
    """The base case looks at step 1 instead of step 0."""

    def base(self) -> int:
        return 1 if self.probe.halted_by(1) else 0


MUTANTS = {
    "swap-zero": SwappedZeroBranch,
    "no-bottom": NoBottomPropagation,
    "base-off-by-one": BaseOffByOne,
}
