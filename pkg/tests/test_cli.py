import filecmp
import json
import subprocess
import sys
from pathlib import Path

import pytest

from splitran.cli import main

SCENARIOS = Path(__file__).parent.parent / "scenarios"


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_validate_ok(capsys):
    assert run_cli("validate", "--scenario", SCENARIOS / "full_sleep.toml") == 0
    assert "valid" in capsys.readouterr().out


def test_validate_bad_scenario(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("version = 1\n[sim]\nhorizon_s = 5.0\n[controller]\nbogus = 1\n")
    assert run_cli("validate", "--scenario", bad) == 1
    assert "controller.bogus: unknown key" in capsys.readouterr().err


def test_validate_missing_file(capsys):
    assert run_cli("validate", "--scenario", "/nope/missing.toml") == 1
    assert "cannot read" in capsys.readouterr().err


def test_run_writes_output_dir(tmp_path, capsys):
    out = tmp_path / "out"
    assert run_cli("run", "--scenario", SCENARIOS / "wake_on_demand.toml",
                   "--out", out) == 0
    expected = {"summary.json", "events.log", "loads.csv", "modes.csv",
                "cdf_delay.csv", "cdf_setup.csv", "cdf_closedown.csv"}
    assert {p.name for p in out.iterdir()} == expected
    summary = json.loads((out / "summary.json").read_text())
    assert summary["requests"]["succeeded"] == 1


def test_run_same_seed_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_cli("run", "--scenario", SCENARIOS / "mixed_service.toml", "--out", out1)
    run_cli("run", "--scenario", SCENARIOS / "mixed_service.toml", "--out", out2)
    comparison = filecmp.dircmp(out1, out2)
    assert not comparison.diff_files and not comparison.funny_files
    for name in (p.name for p in out1.iterdir()):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_run_rejects_negative_seed(tmp_path, capsys):
    out = tmp_path / "out"
    assert run_cli("run", "--scenario", SCENARIOS / "full_sleep.toml",
                   "--seed", -5, "--out", out) == 1
    assert "seed" in capsys.readouterr().err


def test_run_seed_override_changes_output(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_cli("run", "--scenario", SCENARIOS / "mixed_service.toml", "--out", out1)
    run_cli("run", "--scenario", SCENARIOS / "mixed_service.toml",
            "--seed", 1234, "--out", out2)
    assert (out1 / "events.log").read_bytes() != (out2 / "events.log").read_bytes()
    summary = json.loads((out2 / "summary.json").read_text())
    assert summary["seed"] == 1234


def test_replay_clean_log(tmp_path, capsys):
    out = tmp_path / "out"
    run_cli("run", "--scenario", SCENARIOS / "mixed_service.toml", "--out", out)
    assert run_cli("replay", "--log", out / "events.log") == 0
    assert "all invariants hold" in capsys.readouterr().out


def test_replay_detects_corruption(tmp_path, capsys):
    out = tmp_path / "out"
    run_cli("run", "--scenario", SCENARIOS / "load_balance.toml", "--out", out)
    log = out / "events.log"
    lines = log.read_text().splitlines()
    corrupted = []
    done = False
    for line in lines:
        record = json.loads(line)
        if (not done and record["type"] == "dispatch"
                and record["decision"] == "dispatch"):
            loads = {int(k): v for k, v in record["loads"].items()
                     if int(k) not in set(record["excluded"])}
            worst = max(loads, key=lambda i: (loads[i], i))
            if len(loads) >= 2 and worst != record["tbs_id"]:
                record["tbs_id"] = worst
                done = True
        corrupted.append(json.dumps(record, sort_keys=True))
    assert done
    log.write_text("\n".join(corrupted) + "\n")
    assert run_cli("replay", "--log", log) == 2
    assert "least-loaded" in capsys.readouterr().err


def test_replay_unreadable_log(tmp_path, capsys):
    missing = tmp_path / "nope.log"
    assert run_cli("replay", "--log", missing) == 1
    junk = tmp_path / "junk.log"
    junk.write_text("not a log\n")
    assert run_cli("replay", "--log", junk) == 1


@pytest.mark.parametrize("module", ["splitran", "splitran.cli"])
def test_module_entry_point(module):
    result = subprocess.run(
        [sys.executable, "-m", module, "validate",
         "--scenario", str(SCENARIOS / "no_sleep.toml")],
        capture_output=True, text=True)
    assert result.returncode == 0
    assert "valid" in result.stdout
