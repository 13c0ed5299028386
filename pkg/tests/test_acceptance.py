"""Acceptance suite.

Each test pins one acceptance criterion at its stated tolerance and
prints a PASS line once it holds.  Every bundled scenario is executed
through the CLI exactly as a user would run it; the determinism
criterion re-runs each one and compares output directories byte for
byte.  Run with `pytest tests/test_acceptance.py -v -s`.
"""

import random
import time
from pathlib import Path

import pytest

from splitran import wire
from splitran.channels import LogicalChannel, Standard
from splitran.cli import main as cli_main
from splitran.controller import (CbsController, ControllerConfig,
                                 threshold_target_count)
from splitran.energy import EnergyLedger
from splitran.metrics import (export_cdf, fold_records, read_event_log,
                              mean_std, transition_durations, verify_records)
from splitran.station import TbsAgent, TbsMode

from _oracles import (argmin_oracle, cdf_oracle, riemann_energy_oracle,
                      threshold_oracle, window_mean_oracle)

SCENARIO_DIR = Path(__file__).parent.parent / "scenarios"
SCENARIO_NAMES = ["no_sleep", "half_sleep", "full_sleep", "wake_on_demand",
                  "load_balance", "delay_overhead", "mixed_service"]


def _report(criterion: str, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: PASS ({detail})")


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    """Run every bundled scenario once through the CLI."""
    root = tmp_path_factory.mktemp("runs")
    result = {}
    for name in SCENARIO_NAMES:
        outdir = root / name
        started = time.monotonic()
        code = cli_main(["run", "--scenario", str(SCENARIO_DIR / f"{name}.toml"),
                         "--out", str(outdir)])
        elapsed = time.monotonic() - started
        assert code == 0, f"{name} failed to run"
        records = read_event_log(outdir / "events.log")
        result[name] = {
            "outdir": outdir,
            "elapsed": elapsed,
            "records": records,
            "bundle": fold_records(records),
        }
    return result


def test_criterion_1_table_power_reproduction(runs):
    expected = {"no_sleep": 408.4, "half_sleep": 344.8, "full_sleep": 163.8}
    for name, watts in expected.items():
        bundle = runs[name]["bundle"]
        assert bundle.energy.steady_state_power_w == pytest.approx(watts, abs=0.05)
        assert runs[name]["elapsed"] < 1.0, f"{name} took {runs[name]['elapsed']:.2f}s"
    _report("1 power-table reproduction",
            "steady-state 408.4 / 344.8 / 163.8 W, each under 1 s")


def test_criterion_2_savings_claims(runs):
    half = 100 * runs["half_sleep"]["bundle"].energy.power_savings_fraction
    full = 100 * runs["full_sleep"]["bundle"].energy.power_savings_fraction
    assert half == pytest.approx(15.6, abs=0.5)
    assert full == pytest.approx(59.9, abs=0.5)
    _report("2 savings claims", f"half {half:.2f}%, full {full:.2f}%")


def test_criterion_3_delay_overhead(runs):
    bundle = runs["delay_overhead"]["bundle"]
    samples = bundle.delay_samples
    assert len(samples) >= 10_000
    mean, std = mean_std(samples)
    assert abs(mean - 360.0) <= 0.02 * 360.0
    assert abs(std - 100.0) <= 0.05 * 100.0
    # exported file is a valid CDF
    rows = (runs["delay_overhead"]["outdir"] / "cdf_delay.csv").read_text().splitlines()
    assert rows[0] == "delay_us,cumulative_fraction"
    values, fractions = [], []
    for row in rows[1:]:
        value, fraction = row.split(",")
        values.append(float(value))
        fractions.append(float(fraction))
    assert values == sorted(set(values))
    assert fractions == sorted(fractions)
    assert fractions[-1] == 1.0
    _report("3 delay overhead",
            f"{len(samples)} dispatches, mean {mean:.1f} us, std {std:.1f} us")


def test_criterion_4_setup_and_close_down_exact(runs):
    setups, close_downs = [], []
    for name in SCENARIO_NAMES:
        durations = transition_durations(runs[name]["bundle"].mode_log)
        setups += durations["setup"]
        close_downs += durations["close_down"]
    assert setups and close_downs
    assert set(setups) == {8_400_000}
    assert set(close_downs) == {52_000}
    _report("4 setup/close-down fidelity",
            f"{len(setups)} setups at 8.4 s, {len(close_downs)} close-downs at 52 ms")


def test_criterion_5_load_balancing_replay(runs):
    bundle = runs["load_balance"]["bundle"]
    session_rate = bundle.scenario["ues"][0]["session_rate_bps"]
    cross_t = None
    for d in bundle.dispatch_log:
        if (d.decision == "dispatch" and 1 in d.loads and 2 in d.loads
                and d.loads[2] >= d.loads[1]):
            cross_t = d.t_us
            break
    assert cross_t is not None, "loads never crossed"
    pre_cross = [d for d in bundle.dispatch_log
                 if d.decision == "dispatch" and 2 in d.loads and d.t_us < cross_t]
    assert pre_cross, "no dispatches between activation and crossing"
    assert all(d.tbs_id == 2 and d.try_index == 0 for d in pre_cross)
    final = {}
    for point in bundle.load_series:
        final[point.tbs_id] = point.load_bps
    diff = abs(final[1] - final[2])
    assert diff < session_rate
    _report("5 load balancing",
            f"{len(pre_cross)} new sessions to the idle station, "
            f"final imbalance {diff:.0f} B/s < {session_rate:.0f} B/s")


def test_criterion_6_protocol_invariants(runs):
    # trace invariants over every bundled run (argmin optimality, no
    # dispatch to a non-ACTIVE station, ack/unreachable bound, byte
    # conservation, clock order)
    for name in SCENARIO_NAMES:
        assert verify_records(runs[name]["records"]) == [], name
    # accounting closure per run
    for name in SCENARIO_NAMES:
        counters = runs[name]["bundle"].request_counters
        assert counters.issued == (counters.succeeded + counters.failed
                                   + counters.in_flight)
    # byte conservation against the wire: load-report credits match the
    # session bytes accrued up to each station's last report (rates are
    # rounded to whole B/s per report, hence the 0.5 B/report slack)
    for name in ("delay_overhead", "load_balance"):
        records = runs[name]["records"]
        scenario = runs[name]["bundle"].scenario
        horizon = scenario["horizon_us"]
        interval = {s["tbs_id"]: s["report_interval_us"]
                    for s in scenario["stations"]}
        credited, last_tick, n_reports = {}, {}, {}
        for r in records:
            if r["type"] == "report":
                tbs = r["tbs_id"]
                credited[tbs] = (credited.get(tbs, 0.0)
                                 + r["data_rate_bps"] * interval[tbs] / 1e6)
                last_tick[tbs] = max(last_tick.get(tbs, 0), r["generated_us"])
                n_reports[tbs] = n_reports.get(tbs, 0) + 1
        starts = [r for r in records if r["type"] == "session_start"]
        ends = {r["session_id"]: r["t_us"] for r in records
                if r["type"] == "session_end"}
        for tbs, tick in last_tick.items():
            accrued = 0.0
            for s in starts:
                if s["tbs_id"] != tbs:
                    continue
                end = min(ends.get(s["session_id"], horizon), tick)
                accrued += s["rate_bps"] * max(0, end - s["t_us"]) / 1e6
            assert abs(credited[tbs] - accrued) <= 0.5 * n_reports[tbs] + 1.0, (
                name, tbs, credited[tbs], accrued)
    # station mode-graph legality over 1e5 random command sequences
    legal = {
        (TbsMode.ACTIVE, TbsMode.ACTIVE),
        (TbsMode.ACTIVE, TbsMode.CLOSING_DOWN),
        (TbsMode.CLOSING_DOWN, TbsMode.CLOSING_DOWN),
        (TbsMode.CLOSING_DOWN, TbsMode.SLEEPING),
        (TbsMode.SLEEPING, TbsMode.SLEEPING),
        (TbsMode.SLEEPING, TbsMode.SETTING_UP),
        (TbsMode.SETTING_UP, TbsMode.SETTING_UP),
        (TbsMode.SETTING_UP, TbsMode.ACTIVE),
    }
    rng = random.Random(2024)
    checked = 0
    for _ in range(100_000):
        agent = TbsAgent(1)
        now = 0
        for _ in range(rng.randint(2, 6)):
            now += rng.randint(1, 10_000_000)
            before = agent.mode
            roll = rng.randrange(3)
            if roll == 0:
                agent.handle_command(wire.Sleep(1, now, 1), now)
            elif roll == 1:
                agent.handle_command(wire.Wake(1, now, 2), now)
            else:
                agent.step_transition(now)
            assert (before, agent.mode) in legal
            checked += 1
    _report("6 protocol invariants",
            f"{len(SCENARIO_NAMES)} traces verified, "
            f"{checked} random transitions all legal")


def test_criterion_7_determinism(runs, tmp_path):
    for name in SCENARIO_NAMES:
        outdir = tmp_path / name
        code = cli_main(["run", "--scenario", str(SCENARIO_DIR / f"{name}.toml"),
                         "--out", str(outdir)])
        assert code == 0
        first = runs[name]["outdir"]
        names_a = sorted(p.name for p in first.iterdir())
        names_b = sorted(p.name for p in outdir.iterdir())
        assert names_a == names_b
        for file_name in names_a:
            assert ((first / file_name).read_bytes()
                    == (outdir / file_name).read_bytes()), (name, file_name)
    _report("7 determinism",
            f"{len(SCENARIO_NAMES)} scenarios re-run byte-identically")


def test_criterion_8_oracle_equivalence():
    rng = random.Random(777)
    count = 1_000

    # compute_load vs brute-force window re-filtering
    for _ in range(count):
        retention = rng.randrange(1_000, 30_000)
        cbs = CbsController(ControllerConfig(retention_us=retention))
        history = []
        now = 0
        for _ in range(rng.randint(1, 15)):
            now += rng.randrange(1, 10_000)
            rate = rng.randrange(0, 50_000)
            cbs.ingest_load_report(wire.LoadReport(1, now, 0, 0, rate), now=now)
            history.append((now, rate))
        assert cbs.compute_load(1, now) == pytest.approx(
            window_mean_oracle(history, now, retention))

    # dispatch argmin vs linear scan
    pdtch = LogicalChannel(Standard.GSM_GPRS, "PDTCH")
    for _ in range(count):
        cbs = CbsController()
        loads = {}
        for tbs in range(1, rng.randint(2, 7) + 1):
            rate = rng.randrange(0, 10_000)
            cbs.ingest_load_report(wire.LoadReport(tbs, 0, 0, 0, rate), now=0)
            loads[tbs] = rate
        assert cbs.dispatch(pdtch, now=0).decision.tbs_id == argmin_oracle(loads)

    # threshold policy vs exhaustive candidate check
    for _ in range(count):
        stations = rng.randint(1, 6)
        active = rng.randint(0, stations)
        capacity = rng.uniform(1_000, 50_000)
        rho_up = rng.uniform(0.4, 0.9)
        rho_down = rng.uniform(0.05, rho_up * 0.9)
        load = 0.0 if rng.random() < 0.1 else rng.uniform(0, stations * capacity)
        assert threshold_target_count(
            load, active, stations, capacity, rho_up, rho_down
        ) == threshold_oracle(load, active, stations, capacity, rho_up, rho_down)

    # CDF export vs counting definition
    for _ in range(count):
        samples = [rng.randrange(0, 30) for _ in range(rng.randint(1, 40))]
        got = [(r.value, r.cumulative_fraction) for r in export_cdf(samples)]
        assert got == pytest.approx(cdf_oracle(samples))

    # energy integration vs Riemann sum over a random timeline
    for _ in range(count):
        pieces = rng.randint(1, 8)
        breakpoints = sorted(rng.sample(range(0, 1_000_000), pieces + 1))
        segments = [{c: rng.uniform(0, 400) for c in ("pc", "usrp", "switch")}
                    for _ in range(pieces)]
        ledger = EnergyLedger(breakpoints[0])
        for i, segment in enumerate(segments):
            ledger.accumulate(breakpoints[i], breakpoints[i + 1], segment)
        assert ledger.totals_wus == pytest.approx(
            riemann_energy_oracle(breakpoints, segments))

    _report("8 oracle equivalence",
            f"5 operations x {count} randomized instances")
