"""Property suite: acceptance criteria 1-8 as executable checks.

Every check takes an operator class so the same code can be pointed at the
real F or at one of the mutants in :mod:`haltlab.mutants`.  Reports contain
the seed and scale but no timings, so a fixed seed gives identical bytes.
"""

from __future__ import annotations

import json
import random
from collections.abc import Callable, Iterator
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Optional

from . import fixtures
from .domain import (
    BOTTOM,
    ZERO,
    InvalidObservation,
    OneTailFrom,
    PartialObservation,
    is_directed,
    leq,
    lub,
    monotone_observations,
)
from .fixpoint import (
    HaltingOperator,
    HaltingProbe,
    FuelExhausted,
    check_fixed_point,
    fixed_points_exhaustive,
    fixed_points_pruned,
    make_p_omega,
    semidecide_halts,
    strictly_less,
)
from .guest import GuestVerdict, make_constant_decider
from .harness import diagonalize
from .machine import HaltsAt, Machine, RunningAt, run_bounded
from .mutants import MUTANTS
from .tm import enumerate_machines, enumeration_count

OperatorClass = Callable[..., HaltingOperator]
Named = tuple[str, Machine]


@dataclass(frozen=True)
class SuiteConfig:
    scale: str = "default"
    seed: int = 0
    n_states: int = 2
    n_symbols: int = 2
    population: Optional[int] = None  # None: the whole enumeration
    chain_stages: int = 64
    window: int = 64
    mono_width: int = 5
    mono_machines: int = 50
    cont_machines: int = 20
    cont_sets: int = 1000
    omega_max_k: int = 64
    brute_sample: int = 8
    overhead_max: int = 100
    diagonal_max: int = 25
    loop_horizon: int = 1000
    schedule: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64, 128, 256)
    mutants: bool = True

    @classmethod
    def for_scale(cls, scale: str, seed: int = 0) -> "SuiteConfig":
        if scale == "default":
            return cls(seed=seed)
        if scale == "quick":
            return cls(
                scale="quick",
                seed=seed,
                population=300,
                chain_stages=32,
                mono_machines=10,
                cont_machines=5,
                cont_sets=100,
                brute_sample=2,
                overhead_max=20,
                diagonal_max=5,
            )
        raise ValueError(f"unknown scale {scale!r} (expected 'default' or 'quick')")


@dataclass(frozen=True)
class CriterionResult:
    key: str
    title: str
    passed: bool
    checked: int
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        tail = f" -- {self.detail}" if self.detail else ""
        return f"[{mark}] {self.key} {self.title}: {self.checked} checks{tail}"

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


class _Tally:
    """Counts checks and keeps the first counterexample."""

    def __init__(self, fail_fast: bool):
        self.fail_fast = fail_fast
        self.checked = 0
        self.failures = 0
        self.first: Optional[str] = None

    def check(self, ok: bool, why: Callable[[], str]) -> bool:
        """Record one check; True means the caller should stop."""
        self.checked += 1
        if not ok:
            self.failures += 1
            if self.first is None:
                self.first = why()
        return not ok and self.fail_fast

    def result(self, key: str, title: str, summary: str = "") -> CriterionResult:
        if self.failures:
            return CriterionResult(key, title, False, self.checked, f"{self.failures} failures; first: {self.first}")
        return CriterionResult(key, title, True, self.checked, summary)


# -- machine populations --------------------------------------------------------


def population(cfg: SuiteConfig) -> Iterator[Named]:
    """Enumerated machines, or a seeded sample of them at reduced scale."""
    tag = f"enum({cfg.n_states},{cfg.n_symbols})"
    total = enumeration_count(cfg.n_states, cfg.n_symbols)
    keep = None
    if cfg.population is not None and cfg.population < total:
        keep = set(random.Random(f"population:{cfg.seed}").sample(range(total), cfg.population))
    for i, m in enumerate(enumerate_machines(cfg.n_states, cfg.n_symbols)):
        if keep is None or i in keep:
            yield f"{tag}#{i}", m


def sampled_machines(cfg: SuiteConfig, k: int, salt: str) -> list[Named]:
    """Fixture machines first, then seeded enumeration samples, k in total."""
    named: list[Named] = [(n, fixtures.tm(n)) for n in fixtures.TM_TEXTS]
    named += [(f"guest:{n}", fixtures.guest(n)) for n in fixtures.GUEST_TEXTS]
    named = named[:k]
    total = enumeration_count(cfg.n_states, cfg.n_symbols)
    need = k - len(named)
    if need > 0:
        pick = set(random.Random(f"{salt}:{cfg.seed}").sample(range(total), need))
        tag = f"enum({cfg.n_states},{cfg.n_symbols})"
        for i, m in enumerate(enumerate_machines(cfg.n_states, cfg.n_symbols)):
            if i in pick:
                named.append((f"{tag}#{i}", m))
    return named


# -- criteria 1 and 4, plus chain laws: one streaming pass ---------------------


def chain_checks(
    cfg: SuiteConfig, operator: OperatorClass = HaltingOperator, fail_fast: bool = False
) -> tuple[CriterionResult, CriterionResult, CriterionResult]:
    """Criterion 1 (defined set of stage i is 0..i-1), criterion 4 (no stage is
    a fixed point; witness = defined-set size) and the remaining chain laws
    (ascending, bounded class, agreement with a plain simulation)."""
    shape, nofix, laws = _Tally(fail_fast), _Tally(fail_fast), _Tally(fail_fast)
    N = cfg.chain_stages
    machines = 0
    for name, m in population(cfg):
        machines += 1
        inp = m.default_input()
        op = operator(m, inp, cfg.window)
        truth, _ = run_bounded(m, inp, N)
        K = truth.step if isinstance(truth, HaltsAt) else None
        prev: Optional[PartialObservation] = None
        stop = False
        for i in range(N + 1):
            try:
                p = BOTTOM_OBS if i == 0 else op(prev)
            except InvalidObservation as exc:
                stop |= shape.check(False, lambda: f"{name} stage {i}: F left the domain ({exc})")
                break
            n = len(p.entries)
            # entries are sorted and distinct, so this pins them to 0..i-1
            stop |= shape.check(
                p.is_bounded and n == i and (i == 0 or p.entries[-1][0] == i - 1),
                lambda: f"{name} stage {i} ({p}) is not defined on exactly 0..{i - 1}",
            )
            try:
                fp = check_fixed_point(op, p)
            except (InvalidObservation, AssertionError) as exc:
                stop |= nofix.check(False, lambda: f"{name} stage {i}: {exc}")
                break
            stop |= nofix.check(
                not fp.fixed and fp.witness == n,
                lambda: f"{name} stage {i}: fixed={fp.fixed} witness={fp.witness}, defined-set size {n}",
            )
            if prev is not None:
                # for bottom-tailed values, prev ⊑ p iff prev's entries are a prefix
                # of p's; with the prefix checked, only the newest index is unverified
                stop |= laws.check(
                    p.entries[: len(prev.entries)] == prev.entries or leq(prev, p),
                    lambda: f"{name}: stage {i - 1} not below stage {i}",
                )
                want = 1 if K is not None and K <= i - 1 else 0
                stop |= laws.check(
                    p.lookup(i - 1) == want,
                    lambda: f"{name} stage {i} index {i - 1}: {p.lookup(i - 1)} vs halting step {K}",
                )
            prev = p
            if stop:
                break
        if stop:
            break
    what = f"{machines} machines x {N + 1} stages"
    return (
        shape.result("criterion 1", "chain shape", what),
        nofix.result("criterion 4", "no bounded fixed point", what),
        laws.result("property", "chain ascends and agrees with simulation", what),
    )


BOTTOM_OBS = PartialObservation()


# -- criterion 2 ---------------------------------------------------------------


def monotonicity(cfg: SuiteConfig, operator: OperatorClass = HaltingOperator, fail_fast: bool = False) -> CriterionResult:
    obs = list(monotone_observations(cfg.mono_width))
    pairs = [(a, b) for a, p in enumerate(obs) for b, q in enumerate(obs) if a != b and leq(p, q)]
    tally = _Tally(fail_fast)
    machines = sampled_machines(cfg, cfg.mono_machines, "monotonicity")
    for name, m in machines:
        op = operator(m, m.default_input(), cfg.window)
        try:
            images = [op(p) for p in obs]
        except InvalidObservation as exc:
            if tally.check(False, lambda: f"{name}: F left the domain ({exc})"):
                return tally.result("criterion 2", "monotonicity")
            continue
        for a, b in pairs:
            if tally.check(
                leq(images[a], images[b]),
                lambda: f"{name}: {obs[a]} ⊑ {obs[b]} but F gives {images[a]} and {images[b]}",
            ):
                return tally.result("criterion 2", "monotonicity")
    return tally.result(
        "criterion 2", "monotonicity", f"{len(obs)} observations, {len(pairs)} ordered pairs, {len(machines)} machines"
    )


# -- criterion 3 ---------------------------------------------------------------


def random_directed_set(rng: random.Random, width: int = 5) -> list[PartialObservation]:
    """Chains and fans of restrictions of one random target observation.

    Restrictions of a common target are pairwise compatible; fans also get
    their union, which makes them directed.
    """
    kind = rng.choice(("plain", "plain", "zero", "one"))
    K = rng.randint(0, width)
    if kind == "zero":
        bits, tail = [0] * width, ZERO
    else:
        bits = [0] * min(K, width) + [1] * (width - min(K, width))
        tail = OneTailFrom(K) if kind == "one" else BOTTOM

    def restrict(idx, with_tail: bool) -> PartialObservation:
        return PartialObservation(tuple((k, bits[k]) for k in sorted(idx)), tail if with_tail else BOTTOM)

    size = rng.randint(1, 5)
    if rng.random() < 0.5:
        order = list(range(width))
        rng.shuffle(order)
        cuts = sorted(rng.randint(0, width) for _ in range(size))
        tail_from = rng.randint(0, size)
        return [restrict(order[:c], j >= tail_from) for j, c in enumerate(cuts)]
    parts = []
    for _ in range(size):
        idx = [k for k in range(width) if rng.random() < 0.5]
        parts.append((idx, rng.random() < 0.3))
    members = [restrict(idx, t) for idx, t in parts]
    union = sorted({k for idx, _ in parts for k in idx})
    members.append(restrict(union, any(t for _, t in parts)))
    return members


def continuity(cfg: SuiteConfig, operator: OperatorClass = HaltingOperator, fail_fast: bool = False) -> CriterionResult:
    tally = _Tally(fail_fast)
    machines = sampled_machines(cfg, cfg.cont_machines, "continuity")
    for mi, (name, m) in enumerate(machines):
        rng = random.Random(f"continuity:{cfg.seed}:{mi}")
        op = operator(m, m.default_input(), cfg.window)
        for s in range(cfg.cont_sets):
            C = random_directed_set(rng, cfg.mono_width)
            if not is_directed(C):
                raise AssertionError(f"generator produced a non-directed set: {[str(p) for p in C]}")
            try:
                left = op(lub(C))
            except InvalidObservation as exc:
                left = f"outside the domain ({exc})"
            try:
                right = lub(op(p) for p in C)
            except ValueError as exc:
                right = f"undefined ({exc})"
            if tally.check(
                left == right,
                lambda: f"{name} set {s} {[str(p) for p in C]}: F(lub)={left}, lub(F)={right}",
            ):
                return tally.result("criterion 3", "continuity")
    return tally.result("criterion 3", "continuity", f"{len(machines)} machines x {cfg.cont_sets} directed sets")


# -- criterion 5 ---------------------------------------------------------------


def omega_checks(cfg: SuiteConfig, operator: OperatorClass = HaltingOperator, fail_fast: bool = False) -> CriterionResult:
    """For machines halting at step K <= max: p_omega has the expected shape, is
    fixed, and nothing strictly below it is fixed in the window 0..K+2."""
    tally = _Tally(fail_fast)
    halting = 0
    brute_left = cfg.brute_sample
    for name, m in population(cfg):
        inp = m.default_input()
        K = HaltingProbe(m, inp).halt_step_within(cfg.omega_max_k)
        if K is None:
            continue
        halting += 1
        op = operator(m, inp, cfg.window)
        p = make_p_omega(m, inp, cfg.omega_max_k)
        shape_ok = (
            isinstance(p, PartialObservation)
            and p.tail == OneTailFrom(K)
            and all(p.lookup(k) == (1 if k >= K else 0) for k in range(K + cfg.window))
        )
        if tally.check(shape_ok, lambda: f"{name} (halts at {K}): p_omega = {p}"):
            break
        try:
            fp = check_fixed_point(op, p)
            found = fixed_points_pruned(op, K + 3)
        except (InvalidObservation, AssertionError) as exc:
            if tally.check(False, lambda: f"{name}: F left the domain ({exc})"):
                break
            continue
        if tally.check(fp.fixed, lambda: f"{name} (halts at {K}): p_omega not fixed, witness {fp.witness}"):
            break
        below = [q for q in found if strictly_less(q, p)]
        if tally.check(not below, lambda: f"{name}: fixed point {below[0]} strictly below {p}"):
            break
        above = all(leq(p, q) for q in found)
        if tally.check(above, lambda: f"{name}: a fixed point is incomparable with {p}"):
            break
        if K <= 3 and brute_left > 0:
            brute_left -= 1
            brute = fixed_points_exhaustive(op, K + 3)
            if tally.check(
                set(brute) == set(found), lambda: f"{name}: pruned search disagrees with brute force"
            ):
                break
    return tally.result(
        "criterion 5",
        "p_omega is the least fixed point",
        f"{halting} halting machines with K <= {cfg.omega_max_k}, {cfg.brute_sample - brute_left} brute-force cross-checks",
    )


# -- criteria 6 and 7 -----------------------------------------------------------


def _fixture_runs() -> list[tuple[str, Machine, Optional[int]]]:
    out: list[tuple[str, Machine, Optional[int]]] = []
    for n in fixtures.TM_TEXTS:
        out.append((n, fixtures.tm(n), fixtures.HALTING_TM.get(n)))
    for n in fixtures.GUEST_TEXTS:
        if n in fixtures.HALTING_GUEST or n in fixtures.NON_HALTING_GUEST:
            out.append((f"guest:{n}", fixtures.guest(n), fixtures.HALTING_GUEST.get(n)))
    return out


def overhead(cfg: SuiteConfig) -> CriterionResult:
    tally = _Tally(False)
    names = list(fixtures.NON_HALTING_TM) + [f"guest:{n}" for n in fixtures.NON_HALTING_GUEST]
    for name in names:
        m = fixtures.guest(name[6:]) if name.startswith("guest:") else fixtures.tm(name)
        inp = m.default_input()
        for T in range(cfg.overhead_max + 1):
            verdict, ledger = run_bounded(m, inp, T)
            tally.check(
                verdict == RunningAt(T) and ledger.total == T + 1,
                lambda: f"{name} T={T}: {verdict}, total {ledger.total}",
            )
    return tally.result(
        "criterion 6", "overhead total = T+1", f"{len(names)} non-halting fixtures x T in 0..{cfg.overhead_max}"
    )


def diagonal(cfg: SuiteConfig) -> CriterionResult:
    tally = _Tally(False)
    for T in range(cfg.diagonal_max + 1):
        tr = diagonalize(T, loop_horizon=cfg.loop_horizon)
        tally.check(
            tr.contradiction and (not tr.x_halts or tr.x_step >= T + 1),
            lambda: f"T={T}: " + "; ".join(tr.lines()),
        )
    for verdict in GuestVerdict:
        tr = diagonalize(0, decider=make_constant_decider(verdict), loop_horizon=cfg.loop_horizon)
        tally.check(tr.contradiction, lambda: f"constant {verdict.name}: " + "; ".join(tr.lines()))
    for name, m, K in _fixture_runs():
        answer = semidecide_halts(m, m.default_input(), cfg.schedule)
        expect = HaltsAt(K) if K is not None else FuelExhausted(cfg.schedule[-1])
        tally.check(answer == expect, lambda: f"semidecide {name}: {answer}, expected {expect}")
    return tally.result(
        "criterion 7",
        "diagonal contradiction and semi-decision",
        f"T in 0..{cfg.diagonal_max}, 2 constant deciders, {len(_fixture_runs())} fixtures",
    )


# -- criterion 8 ---------------------------------------------------------------

_MUTANT_ORDER = ("criterion 2", "criterion 3", "criterion 5", "criterion 1", "criterion 4")


def _run_for_mutant(cfg: SuiteConfig, operator: OperatorClass, key: str) -> CriterionResult:
    if key == "criterion 2":
        return monotonicity(cfg, operator, fail_fast=True)
    if key == "criterion 3":
        return continuity(cfg, operator, fail_fast=True)
    if key == "criterion 5":
        return omega_checks(cfg, operator, fail_fast=True)
    c1, c4, _ = chain_checks(cfg, operator, fail_fast=True)
    return c1 if key == "criterion 1" else c4


def mutant_sensitivity(cfg: SuiteConfig) -> tuple[CriterionResult, dict[str, Optional[CriterionResult]]]:
    caught: dict[str, Optional[CriterionResult]] = {}
    for name, cls in MUTANTS.items():
        caught[name] = None
        for key in _MUTANT_ORDER:
            r = _run_for_mutant(cfg, cls, key)
            if not r.passed:
                caught[name] = r
                break
    missed = [n for n, r in caught.items() if r is None]
    summary = ", ".join(f"{n} caught by {r.key}" for n, r in caught.items() if r is not None)
    if missed:
        return CriterionResult("criterion 8", "mutant sensitivity", False, len(caught), f"not caught: {missed}"), caught
    return CriterionResult("criterion 8", "mutant sensitivity", True, len(caught), summary), caught


# -- whole suite ----------------------------------------------------------------


@dataclass
class SuiteReport:
    config: SuiteConfig
    results: list[CriterionResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def text(self) -> str:
        head = f"suite scale={self.config.scale} seed={self.config.seed}"
        lines = [head] + [r.line() for r in self.results]
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "schema": "haltlab.suite/1",
            "config": asdict(self.config),
            "results": [r.as_dict() for r in self.results],
            "passed": self.passed,
        }
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def run_suite(cfg: SuiteConfig, operator: OperatorClass = HaltingOperator) -> SuiteReport:
    """All criteria against ``operator``; mutant sensitivity only for the real F."""
    report = SuiteReport(cfg)
    c1, c4, laws = chain_checks(cfg, operator)
    report.results += [
        c1,
        monotonicity(cfg, operator),
        continuity(cfg, operator),
        c4,
        omega_checks(cfg, operator),
        overhead(cfg),
        diagonal(cfg),
    ]
    if cfg.mutants and operator is HaltingOperator:
        report.results.append(mutant_sensitivity(cfg)[0])
    report.results.append(laws)
    return report


def with_overrides(cfg: SuiteConfig, **changes: Any) -> SuiteConfig:
    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})
