"""Power-state model and time-integrated energy ledger.

Per-component powers default to the testbed figures: one always-on
control station PC (129 W) with its radio head (13.8 W), a 21 W switch,
and per traffic station a PC (108.5 W serving, 90.5 W with the BS
software stopped, 0 W powered off) plus a 13.8 W radio head.  Half sleep
stops the software and radio head but keeps the PC up; full sleep powers
the PC off too.  Stations mid-transition are billed at full power.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

from .station import TbsMode

US_PER_HOUR = 3_600_000_000.0


class TimelineGap(ValueError):
    """Ledger update does not start where the previous one ended."""


class ZeroBaseline(ValueError):
    """Savings are undefined against a non-positive baseline."""


class SleepDepth(enum.Enum):
    HALF = "HALF"
    FULL = "FULL"


@dataclass(frozen=True)
class PowerProfile:
    cbs_pc_w: float = 129.0
    tbs_pc_active_w: float = 108.5
    tbs_pc_software_off_w: float = 90.5
    tbs_pc_off_w: float = 0.0
    usrp_on_w: float = 13.8
    usrp_off_w: float = 0.0
    switch_w: float = 21.0
    sleep_depth: SleepDepth = SleepDepth.FULL

    def __post_init__(self) -> None:
        for name in ("cbs_pc_w", "tbs_pc_active_w", "tbs_pc_software_off_w",
                     "tbs_pc_off_w", "usrp_on_w", "usrp_off_w", "switch_w"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not (self.tbs_pc_off_w <= self.tbs_pc_software_off_w
                <= self.tbs_pc_active_w):
            raise ValueError("need tbs_pc_off_w <= tbs_pc_software_off_w"
                             " <= tbs_pc_active_w")

    def sleeping_tbs_pc_w(self) -> float:
        if self.sleep_depth is SleepDepth.FULL:
            return self.tbs_pc_off_w
        return self.tbs_pc_software_off_w


def component_powers(profile: PowerProfile,
                     tbs_modes: Mapping[int, TbsMode]) -> dict[str, float]:
    """Instantaneous draw per component for the given station modes."""
    powers = {
        "cbs.pc": profile.cbs_pc_w,
        "cbs.usrp": profile.usrp_on_w,
        "switch": profile.switch_w,
    }
    for tbs_id in sorted(tbs_modes):
        if tbs_modes[tbs_id] is TbsMode.SLEEPING:
            pc, usrp = profile.sleeping_tbs_pc_w(), profile.usrp_off_w
        else:
            pc, usrp = profile.tbs_pc_active_w, profile.usrp_on_w
        powers[f"tbs{tbs_id}.pc"] = pc
        powers[f"tbs{tbs_id}.usrp"] = usrp
    return powers


def station_power(profile: PowerProfile,
                  tbs_modes: Mapping[int, TbsMode]) -> float:
    """Total testbed draw in watts for the given station modes."""
    return sum(component_powers(profile, tbs_modes).values())


class EnergyLedger:
    """Gap-free time integration of per-component power.

    Energy is accumulated in watt-microseconds; each accumulate() call
    must start exactly where the previous one ended so the timeline has
    no gaps or overlaps.
    """

    def __init__(self, start_us: int = 0) -> None:
        self.last_update = start_us
        self.totals_wus: dict[str, float] = {}

    def accumulate(self, from_us: int, to_us: int,
                   watts: Mapping[str, float]) -> None:
        if from_us != self.last_update:
            raise TimelineGap(
                f"interval starts at {from_us}, ledger ends at {self.last_update}")
        if to_us < from_us:
            raise ValueError("interval ends before it starts")
        span = to_us - from_us
        for component, power in watts.items():
            self.totals_wus[component] = (
                self.totals_wus.get(component, 0.0) + power * span)
        self.last_update = to_us

    def totals_wh(self) -> dict[str, float]:
        return {c: wus / US_PER_HOUR for c, wus in self.totals_wus.items()}

    def total_wh(self) -> float:
        return sum(self.totals_wus.values()) / US_PER_HOUR


def savings(baseline_energy: float, actual_energy: float) -> float:
    """Fraction of the baseline saved: (baseline - actual) / baseline."""
    if baseline_energy <= 0:
        raise ZeroBaseline("baseline must be positive")
    return (baseline_energy - actual_energy) / baseline_energy
