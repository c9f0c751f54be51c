import json
import subprocess
import sys
from pathlib import Path

import pytest

from haltlab.cli import main

MACHINES = Path(__file__).resolve().parent.parent / "machines"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_examples(capsys):
    assert run(capsys, "run", MACHINES / "m_halt2.tm", "--input", "empty", "--bound", 5)[:2] == (0, "HALTS at 2; ticks: 3\n")
    assert run(capsys, "run", MACHINES / "m_loop.tm", "--bound", 3)[:2] == (1, "RUNNING at 3; ticks: 4\n")
    code, _, err = run(capsys, "run", MACHINES / "missing.tm")
    assert code == 2 and "missing.tm" in err


def test_run_usage_errors(capsys, tmp_path):
    assert run(capsys, "run")[0] == 2
    bad = tmp_path / "bad.tm"
    bad.write_text("nonsense\n")
    assert run(capsys, "run", bad)[0] == 2
    assert run(capsys, "run", MACHINES / "m_loop.tm", "--bound", -1)[0] == 2


def test_run_json(capsys):
    code, out, _ = run(capsys, "run", MACHINES / "g_countdown.gasm", "--format", "json")
    assert code == 0
    assert json.loads(out) == {"verdict": "HALTS", "step": 17, "simulated_steps": 17, "verdict_ticks": 1, "total": 18}


def test_chain_formats(capsys):
    code, out, _ = run(capsys, "chain", MACHINES / "m_halt2.tm", "--input", "empty", "-n", 4, "--format", "csv")
    assert code == 0
    assert out.splitlines()[-4:] == ["4,0,0", "4,1,0", "4,2,1", "4,3,1"]
    _, out, _ = run(capsys, "chain", MACHINES / "m_loop.tm", "-n", 3)
    assert out.splitlines()[-1].endswith("[0 0 0 | ⊥]")
    _, out, _ = run(capsys, "chain", MACHINES / "m_loop.tm", "-n", 0, "--format", "csv")
    assert out == "stage,index,value\n0,,⊥\n"
    _, out, _ = run(capsys, "chain", MACHINES / "m_loop.tm", "-n", 1, "--format", "json")
    assert json.loads(out)["machine"] == "m_loop"


def test_overhead(capsys):
    code, out, _ = run(capsys, "overhead", MACHINES / "m_loop.tm", "--bounds", "0..20", "--format", "csv")
    totals = [int(line.split(",")[-1]) for line in out.splitlines()[1:]]
    assert code == 0 and totals == [T + 1 for T in range(21)]
    _, out, _ = run(capsys, "overhead", MACHINES / "m_halt2.tm", "--input", "empty", "--bounds", "20", "--format", "csv")
    totals = [int(line.split(",")[-1]) for line in out.splitlines()[1:]]
    assert totals == [1, 2] + [3] * 19
    code, out, _ = run(capsys, "overhead", MACHINES / "m_loop.tm", "--bounds", "5..4")
    assert code == 0 and out == ""


def test_diagonalize(capsys):
    code, out, _ = run(capsys, "diagonalize", "--bound", 3)
    assert code == 0 and "DOES_NOT_HALT" in out and "contradiction: yes" in out
    code, out, _ = run(capsys, "diagonalize", "--bound", 0, "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["contradiction"] and doc["x_step"] >= 1
    assert run(capsys, "diagonalize", "--bound", -2)[0] == 2


def test_omega(capsys):
    assert run(capsys, "omega", MACHINES / "m_halt2.tm", "--input", "empty")[:2] == (0, "[0 0 | 1…@2]\n")
    code, out, _ = run(capsys, "omega", MACHINES / "m_loop.tm", "--fuel", 100)
    assert code == 1 and "STILL RUNNING after 100" in out


def test_config_file(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "h.cfg"
    cfg.write_text("chain_cap = 2\n")
    _, out, _ = run(capsys, "--config", cfg, "chain", MACHINES / "m_loop.tm", "--format", "csv")
    assert out.splitlines()[-1] == "2,1,0"
    monkeypatch.setenv("HALTLAB_CONFIG", str(cfg))
    _, out, _ = run(capsys, "chain", MACHINES / "m_loop.tm", "--format", "csv")
    assert out.splitlines()[-1] == "2,1,0"
    bad = tmp_path / "bad.cfg"
    bad.write_text("nope = 1\n")
    assert run(capsys, "--config", bad, "diagonalize", "--bound", 1)[0] == 2


def test_suite_quick_is_deterministic(capsys):
    code, first, _ = run(capsys, "suite", "--scale", "quick", "--seed", 3)
    _, second, _ = run(capsys, "suite", "--scale", "quick", "--seed", 3)
    assert code == 0 and first == second
    assert "seed=3" in first and first.rstrip().endswith("overall: PASS")


def test_suite_with_mutant_fails(capsys):
    code, out, _ = run(capsys, "suite", "--scale", "quick", "--mutant", "swap-zero")
    assert code == 1 and "[FAIL]" in out


def test_report(capsys):
    code, out, _ = run(capsys, "report", MACHINES / "m_count3.tm", "-n", 4)
    assert code == 0 and json.loads(out)["machine_id"] == "m_count3"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "haltlab", "run", str(MACHINES / "m_halt0.tm"), "--bound", "0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stdout == "HALTS at 0; ticks: 1\n"
