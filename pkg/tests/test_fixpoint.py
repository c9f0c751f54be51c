import pytest
from hypothesis import given
from hypothesis import strategies as st

from haltlab import fixtures
from haltlab.domain import BOT, ZERO, OneTailFrom, PartialObservation, halting_observation, leq, lub, observation
from haltlab.fixpoint import (
    FuelExhausted,
    HaltingOperator,
    StillRunning,
    apply_F,
    candidate_observations,
    check_fixed_point,
    fixed_points_exhaustive,
    fixed_points_pruned,
    is_fixed_point,
    iterate_chain,
    make_p_omega,
    semidecide_halts,
    strictly_less,
)
from haltlab.machine import CostLedger, HaltsAt
from haltlab.tm import enumerate_machines
from oracles import as_dict, chain_stage, ref_tm_halt_step

H0, H2, LOOP = fixtures.tm("m_halt0"), fixtures.tm("m_halt2"), fixtures.tm("m_loop")
ENUM = list(enumerate_machines(2, 2))


def test_base_case_reads_step_zero():
    # [REFERENCE] F(p)(0) is 1 exactly when the machine halts at or before step 0
    assert apply_F(H0, (), BOT) == observation([1])
    assert apply_F(LOOP, LOOP.default_input(), BOT) == observation([0])


def test_one_step_extension():
    assert apply_F(H2, (), observation([0, 0])) == observation([0, 0, 1])


def test_hole_propagates():
    # [DERIVED] p = {1->0}: r(0) = 0 (not halted at 0), r(1) = ⊥ from p(0) = ⊥,
    # r(2) = 1 since p(1) = 0 and M_halt2 halts at step 2
    r = apply_F(H2, (), observation([None, 0]))
    assert [r(k) for k in range(4)] == [0, None, 1, None]


def test_tails_map_through_the_table():
    op = HaltingOperator(H2, ())
    assert op(halting_observation(2)) == halting_observation(2)
    assert op(PartialObservation((), ZERO)) == halting_observation(2)
    assert op(halting_observation(5)) == halting_observation(2)
    assert op(PartialObservation((), OneTailFrom(0))) == observation([0], OneTailFrom(1))
    countdown = fixtures.guest("countdown")  # halts at 17, beyond a window of 5
    assert HaltingOperator(countdown, b"", window=5)(PartialObservation((), ZERO)) == PartialObservation((), ZERO)
    assert HaltingOperator(countdown, b"", window=32)(PartialObservation((), ZERO)) == halting_observation(17)


def test_inconsistent_observation_stays_in_domain():
    # p(0) = 0 contradicts M_halt0; reading the 0-branch as "halted by k+1"
    # keeps the image monotone
    assert apply_F(H0, (), observation([0])) == observation([1, 1])


@given(st.integers(0, len(ENUM) - 1), st.integers(0, 8))
def test_literal_table_on_consistent_observations(index, upto):
    """Restrictions of the true run: F agrees with the literal case table that
    asks whether the machine halts at exactly step k+1."""
    m = ENUM[index]
    inp = m.default_input()
    K = ref_tm_halt_step(m, inp, 20)
    truth = chain_stage(K, upto)
    p = PartialObservation(tuple(truth.items()))
    r = apply_F(m, inp, p)
    assert r(0) == (1 if K == 0 else 0)
    for k in range(upto):
        want = 1 if truth[k] == 1 or K == k + 1 else 0
        assert r(k + 1) == want


@given(st.integers(0, len(ENUM) - 1), st.sampled_from(list(candidate_observations(4))), st.sampled_from(list(candidate_observations(4))), st.integers(0, 6))
def test_locality(index, p, q, k):
    """F(p)(k+1) depends on p only through p(k)."""
    m = ENUM[index]
    op = HaltingOperator(m, m.default_input())
    if p(k) == q(k):
        assert op(p)(k + 1) == op(q)(k + 1)


# -- chains ----------------------------------------------------------------------


def test_chain_examples():
    rec = iterate_chain(H2, (), 4)
    assert [str(s) for s in rec.stages] == ["[| ⊥]", "[0 | ⊥]", "[0 0 | ⊥]", "[0 0 1 | ⊥]", "[0 0 1 1 | ⊥]"]
    rec = iterate_chain(LOOP, LOOP.default_input(), 3)
    assert [as_dict(s, 10) for s in rec.stages] == [chain_stage(None, i) for i in range(4)]
    assert iterate_chain(H2, (), 0).stages == (BOT,)
    with pytest.raises(ValueError):
        iterate_chain(H2, (), -1)


def test_chain_ledgers():
    rec = iterate_chain(H2, (), 5)
    assert rec.ledger_per_stage[0] == CostLedger()
    assert [l.total for l in rec.ledger_per_stage[1:]] == [1, 2, 3, 3, 3]


@given(st.integers(0, len(ENUM) - 1), st.integers(0, 40))
def test_chain_agrees_with_reference_oracle(index, N):
    m = ENUM[index]
    inp = m.default_input()
    K = ref_tm_halt_step(m, inp, N)
    rec = iterate_chain(m, inp, N)
    for i, stage in enumerate(rec.stages):
        assert stage.is_bounded and as_dict(stage, N + 2) == chain_stage(K, i)
        if i:
            assert leq(rec.stages[i - 1], stage)


@pytest.mark.parametrize("name", sorted(fixtures.HALTING_GUEST) + list(fixtures.NON_HALTING_GUEST))
def test_guest_chain_shape(name):
    g = fixtures.guest(name)
    rec = iterate_chain(g, g.default_input(), 20)
    K = fixtures.HALTING_GUEST.get(name)
    assert [as_dict(s, 25) for s in rec.stages] == [chain_stage(K, i) for i in range(21)]


# -- fixed points -----------------------------------------------------------------


def test_fixed_point_examples():
    p3 = iterate_chain(H2, (), 3).stages[3]
    check = is_fixed_point(H2, (), p3, 10)
    assert not check and check.witness == 3
    assert is_fixed_point(H2, (), halting_observation(2), 10)
    assert is_fixed_point(LOOP, LOOP.default_input(), PartialObservation((), ZERO), 10)
    assert not is_fixed_point(H2, (), PartialObservation((), ZERO), 10)


@given(st.integers(0, len(ENUM) - 1), st.sampled_from([p for p in candidate_observations(4) if p.is_bounded]))
def test_bounded_observations_are_never_fixed(index, p):
    m = ENUM[index]
    check = is_fixed_point(m, m.default_input(), p)
    assert not check.fixed and check.witness == p.horizon


def test_p_omega_examples():
    assert make_p_omega(H2, (), 100) == halting_observation(2)
    assert make_p_omega(LOOP, LOOP.default_input(), 100) == StillRunning(100)
    assert make_p_omega(H0, (), 0) == PartialObservation((), OneTailFrom(0))
    with pytest.raises(ValueError):
        make_p_omega(H0, (), -1)


@pytest.mark.parametrize("name,K", sorted(fixtures.HALTING_TM.items()))
def test_p_omega_is_least_fixed_point(name, K):
    m = fixtures.tm(name)
    op = HaltingOperator(m, m.default_input())
    p = make_p_omega(m, m.default_input(), 64)
    assert p == halting_observation(K) and check_fixed_point(op, p)
    found = fixed_points_exhaustive(op, K + 3)
    assert set(found) == set(fixed_points_pruned(op, K + 3))
    assert p in found
    assert all(leq(p, q) and not strictly_less(q, p) for q in found)
    # the chain's supremum over enough stages is p_omega restricted to a prefix
    top = lub(iterate_chain(m, m.default_input(), K + 5).stages)
    assert all(top(k) == p(k) for k in range(K + 5))


def test_zero_claim_is_only_fixed_point_for_a_looper_in_window():
    op = HaltingOperator(LOOP, LOOP.default_input(), window=16)
    assert fixed_points_pruned(op, 4) == [PartialObservation((), ZERO)]


# -- semi-decision -------------------------------------------------------------------


def test_semidecide_examples():
    assert semidecide_halts(H2, (), [1, 2, 4, 8]) == HaltsAt(2)
    assert semidecide_halts(LOOP, LOOP.default_input(), [1, 2, 4]) == FuelExhausted(4)
    assert semidecide_halts(H0, (), [1]) == HaltsAt(0)
    for bad in ([], [2, 2], [3, 1], [-1, 2]):
        with pytest.raises(ValueError):
            semidecide_halts(H2, (), bad)


@given(st.integers(0, len(ENUM) - 1), st.lists(st.integers(0, 60), min_size=1, max_size=6, unique=True))
def test_semidecide_never_answers_no(index, schedule):
    m = ENUM[index]
    schedule = sorted(schedule)
    K = ref_tm_halt_step(m, m.default_input(), schedule[-1])
    answer = semidecide_halts(m, m.default_input(), schedule)
    assert answer == (HaltsAt(K) if K is not None else FuelExhausted(schedule[-1]))
