import random

import pytest

from splitran.energy import (EnergyLedger, PowerProfile, SleepDepth,
                             TimelineGap, ZeroBaseline, component_powers,
                             savings, station_power)
from splitran.station import TbsMode

from _oracles import riemann_energy_oracle

ACTIVE2 = {1: TbsMode.ACTIVE, 2: TbsMode.ACTIVE}
ASLEEP2 = {1: TbsMode.SLEEPING, 2: TbsMode.SLEEPING}


def test_no_sleep_total():
    assert station_power(PowerProfile(), ACTIVE2) == pytest.approx(408.4)


def test_half_sleep_total():
    profile = PowerProfile(sleep_depth=SleepDepth.HALF)
    assert station_power(profile, ASLEEP2) == pytest.approx(344.8)


def test_full_sleep_total():
    profile = PowerProfile(sleep_depth=SleepDepth.FULL)
    assert station_power(profile, ASLEEP2) == pytest.approx(163.8)


def test_component_rows_reproduce_table():
    # PC / radio-head / switch rows: 346, 41.4, 21 with everything on;
    # 310, 13.8, 21 at half sleep; 129, 13.8, 21 at full sleep.
    def rows(profile, modes):
        comps = component_powers(profile, modes)
        pc = sum(v for k, v in comps.items() if k.endswith(".pc"))
        usrp = sum(v for k, v in comps.items() if k.endswith(".usrp"))
        return pc, usrp, comps["switch"]

    assert rows(PowerProfile(), ACTIVE2) == (pytest.approx(346), pytest.approx(41.4), 21)
    assert rows(PowerProfile(sleep_depth=SleepDepth.HALF), ASLEEP2) == (
        pytest.approx(310), pytest.approx(13.8), 21)
    assert rows(PowerProfile(sleep_depth=SleepDepth.FULL), ASLEEP2) == (
        pytest.approx(129), pytest.approx(13.8), 21)


def test_transitions_billed_at_full_power():
    profile = PowerProfile()
    for mode in (TbsMode.CLOSING_DOWN, TbsMode.SETTING_UP):
        assert station_power(profile, {1: mode, 2: TbsMode.ACTIVE}) == (
            pytest.approx(408.4))


def test_deeper_sleep_never_draws_more():
    half = PowerProfile(sleep_depth=SleepDepth.HALF)
    full = PowerProfile(sleep_depth=SleepDepth.FULL)
    for modes in (ACTIVE2, ASLEEP2, {1: TbsMode.SLEEPING, 2: TbsMode.ACTIVE}):
        assert station_power(full, modes) <= station_power(half, modes)


def test_profile_ordering_enforced():
    with pytest.raises(ValueError):
        PowerProfile(tbs_pc_software_off_w=120.0, tbs_pc_active_w=100.0)
    with pytest.raises(ValueError):
        PowerProfile(switch_w=-1.0)


def test_full_sleep_hour_is_163_8_wh():
    ledger = EnergyLedger(0)
    profile = PowerProfile(sleep_depth=SleepDepth.FULL)
    ledger.accumulate(0, 3_600_000_000, component_powers(profile, ASLEEP2))
    assert ledger.total_wh() == pytest.approx(163.8)


def test_zero_interval_changes_nothing():
    ledger = EnergyLedger(0)
    ledger.accumulate(0, 0, {"x": 100.0})
    assert ledger.total_wh() == 0.0


def test_timeline_gap_rejected():
    ledger = EnergyLedger(0)
    ledger.accumulate(0, 10, {"x": 1.0})
    with pytest.raises(TimelineGap):
        ledger.accumulate(20, 30, {"x": 1.0})
    with pytest.raises(ValueError):
        ledger.accumulate(10, 5, {"x": 1.0})


def test_ledger_matches_riemann_oracle():
    rng = random.Random(99)
    for _ in range(200):
        n = rng.randint(1, 10)
        breakpoints = sorted(rng.sample(range(0, 10_000_000), n + 1))
        segments = [
            {c: rng.uniform(0, 500) for c in ("a", "b", "c")}
            for _ in range(n)
        ]
        ledger = EnergyLedger(breakpoints[0])
        for i, seg in enumerate(segments):
            ledger.accumulate(breakpoints[i], breakpoints[i + 1], seg)
        expected = riemann_energy_oracle(breakpoints, segments)
        assert ledger.totals_wus == pytest.approx(expected)


def test_savings_table_columns():
    assert savings(408.4, 163.8) == pytest.approx(0.599, abs=5e-4)
    assert savings(408.4, 344.8) == pytest.approx(0.156, abs=5e-4)
    assert savings(100.0, 100.0) == 0.0


def test_savings_zero_baseline():
    with pytest.raises(ZeroBaseline):
        savings(0.0, 10.0)
