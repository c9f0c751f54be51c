import csv
import io
import json

import pytest

from haltlab import fixtures, harness
from haltlab.fixpoint import iterate_chain
from haltlab.guest import GuestVerdict, encode, make_constant_decider
from haltlab.machine import HaltsAt, RunningAt


def test_settings_parse_and_env(tmp_path, monkeypatch):
    s = harness.parse_settings("# comment\nchain_cap = 10\nschedule = 1, 3, 9\n\nseed=4\n")
    assert s.chain_cap == 10 and s.schedule == (1, 3, 9) and s.seed == 4
    assert s.window == harness.Settings().window
    with pytest.raises(ValueError):
        harness.parse_settings("bogus = 1\n")
    path = tmp_path / "cfg"
    path.write_text("fuel = 7\n")
    monkeypatch.setenv(harness.CONFIG_ENV, str(path))
    assert harness.load_settings().fuel == 7
    monkeypatch.delenv(harness.CONFIG_ENV)
    assert harness.load_settings() == harness.Settings()


def test_load_machine_by_kind(tmp_path):
    (tmp_path / "a.tm").write_text(fixtures.M_HALT2)
    (tmp_path / "b.gasm").write_text(fixtures.G_COUNTDOWN)
    (tmp_path / "c.bin").write_bytes(encode(fixtures.guest("loop")))
    assert harness.load_machine(tmp_path / "a.tm") == fixtures.tm("m_halt2")
    assert harness.load_machine(tmp_path / "b.gasm") == fixtures.guest("countdown")
    assert harness.load_machine(tmp_path / "c.bin") == fixtures.guest("loop")


def test_parse_input():
    tm, g = fixtures.tm("m_loop"), fixtures.guest("identity")
    assert harness.parse_input(tm, "self") == tm.default_input()
    assert harness.parse_input(tm, "empty") == ()
    assert harness.parse_input(tm, "1_1") == ("1", "_", "1")
    assert harness.parse_input(g, None) == encode(g)
    assert harness.parse_input(g, "empty") == b""
    assert harness.parse_input(g, "12") == 12
    assert harness.parse_input(g, "hex:00ff") == b"\x00\xff"


def test_overhead_rows():
    rows = harness.overhead_table(fixtures.tm("m_halt2"), (), range(6))
    assert [r.ledger.total for r in rows] == [1, 2, 3, 3, 3, 3]
    assert all(r.meets_bound for r in rows)
    assert harness.overhead_table(fixtures.tm("m_loop"), (), range(0)) == []
    text = harness.overhead_csv(rows[:2])
    assert text.splitlines() == [
        "bound,verdict,step,simulated_steps,verdict_ticks,total",
        "0,RUNNING,0,0,1,1",
        "1,RUNNING,1,1,1,2",
    ]


def test_chain_csv_rows():
    rec = iterate_chain(fixtures.tm("m_halt2"), (), 3)
    rows = list(csv.reader(io.StringIO(harness.chain_csv(rec))))
    assert rows == [
        ["stage", "index", "value"],
        ["0", "", "⊥"],
        ["1", "0", "0"],
        ["2", "0", "0"],
        ["2", "1", "0"],
        ["3", "0", "0"],
        ["3", "1", "0"],
        ["3", "2", "1"],
    ]


def test_chain_json_schema():
    rec = iterate_chain(fixtures.tm("m_halt2"), (), 2)
    doc = json.loads(harness.chain_json(rec, "m_halt2"))
    assert doc["schema"] == harness.CHAIN_SCHEMA
    assert doc["stages"] == ["[| ⊥]", "[0 | ⊥]", "[0 0 | ⊥]"]
    assert doc["ledgers"][2] == {"simulated_steps": 1, "verdict_ticks": 1, "total": 2}
    assert doc["input"] == "word[0]" and len(doc["digest"]) == 16


@pytest.mark.parametrize("T", [0, 3, 9])
def test_diagonalize_transcript(T):
    tr = harness.diagonalize(T)
    assert tr.decider_verdict is GuestVerdict.DOES_NOT_HALT
    assert tr.x_halts and tr.x_step >= T + 1 and tr.contradiction
    assert tr.decider_steps == T + 4
    text = "\n".join(tr.lines())
    assert "DOES_NOT_HALT" in text and f"step {tr.x_step}" in text


def test_diagonalize_loop_branch_and_errors():
    tr = harness.diagonalize(0, decider=make_constant_decider(GuestVerdict.HALTS), loop_horizon=50)
    assert not tr.x_halts and tr.x_step is not None and tr.contradiction
    assert "reaches LOOP" in tr.witness()
    with pytest.raises(ValueError):
        harness.diagonalize(-1)


def test_report_is_deterministic():
    m = fixtures.tm("m_count3")
    a = harness.build_report("m_count3", m).to_json()
    b = harness.build_report("m_count3", m).to_json()
    assert a == b
    doc = json.loads(a)
    assert doc["schema"] == harness.REPORT_SCHEMA
    assert doc["diagonal"]["contradiction"] is True
    assert doc["digest"] == harness.digest(m)


def test_format_run():
    from haltlab.machine import CostLedger

    assert harness.format_run(HaltsAt(2), CostLedger(2, 1)) == "HALTS at 2; ticks: 3"
    assert harness.format_run(RunningAt(3), CostLedger(3, 1)) == "RUNNING at 3; ticks: 4"
