"""Acceptance criteria 1-8 at full scale, exact tolerances.

Each test records one PASS/FAIL line (with wall time against its budget);
the lines are repeated in the terminal summary.
"""

import time

import pytest

import acceptance_log
from haltlab.cli import main
from haltlab.suite import (
    SuiteConfig,
    chain_checks,
    continuity,
    diagonal,
    monotonicity,
    mutant_sensitivity,
    omega_checks,
    overhead,
)

CFG = SuiteConfig.for_scale("default", seed=0)


def record(result, seconds=None, budget=None):
    timing = ""
    if seconds is not None:
        timing = f" [{seconds:.1f}s" + (f" / budget {budget}s]" if budget else "]")
    line = result.line() + timing
    acceptance_log.LINES.append(line)
    print(line)
    return result


@pytest.fixture(scope="module")
def chain_pass():
    start = time.perf_counter()
    results = chain_checks(CFG)
    return results, time.perf_counter() - start


def test_criterion_1_chain_shape(chain_pass):
    (c1, _, laws), seconds = chain_pass
    # the pass also evaluates criterion 4, so its time is an upper bound here
    record(c1, seconds, 120)
    assert c1.passed, c1.detail
    assert laws.passed, laws.detail
    assert c1.checked == 28561 * 65
    assert seconds < 120


def test_criterion_2_monotonicity():
    start = time.perf_counter()
    r = record(monotonicity(CFG), time.perf_counter() - start, 120)
    assert r.passed, r.detail
    assert r.checked == 941 * 50
    assert time.perf_counter() - start < 120


def test_criterion_3_continuity():
    start = time.perf_counter()
    r = record(continuity(CFG), time.perf_counter() - start, 120)
    assert r.passed, r.detail
    assert r.checked == 20 * 1000
    assert time.perf_counter() - start < 120


def test_criterion_4_no_bounded_fixed_point(chain_pass):
    (_, c4, _), seconds = chain_pass
    record(c4, seconds)
    assert c4.passed, c4.detail
    assert c4.checked == 28561 * 65


def test_criterion_5_least_fixed_point():
    start = time.perf_counter()
    r = omega_checks(CFG)
    seconds = time.perf_counter() - start
    record(r, seconds, 300)
    assert r.passed, r.detail
    assert seconds < 300


def test_criterion_6_overhead(capsys):
    r = overhead(CFG)
    assert r.passed, r.detail
    assert r.checked == 3 * 101
    # and through the command itself
    from pathlib import Path

    path = Path(__file__).resolve().parent.parent / "machines" / "m_loop.tm"
    code = main(["overhead", str(path), "--bounds", "0..100", "--format", "csv"])
    totals = [int(line.rsplit(",", 1)[1]) for line in capsys.readouterr().out.splitlines()[1:]]
    assert code == 0 and totals == [T + 1 for T in range(101)]
    record(r)


def test_criterion_7_diagonal_and_semidecision():
    r = record(diagonal(CFG))
    assert r.passed, r.detail


def test_criterion_8_mutant_sensitivity():
    start = time.perf_counter()
    r, caught = mutant_sensitivity(CFG)
    record(r, time.perf_counter() - start)
    assert r.passed, r.detail
    assert all(c is not None and c.key in {f"criterion {i}" for i in range(1, 6)} for c in caught.values())
