"""
Energy model
============

Per-component power for one control station, two traffic stations and a
switch, under three operating points: everything on, half sleep
(software and radio heads off) and full sleep (station PCs off too).
"""

from splitran import (EnergyLedger, PowerProfile, SleepDepth, TbsMode,
                      component_powers, savings, station_power)

ACTIVE = {1: TbsMode.ACTIVE, 2: TbsMode.ACTIVE}
ASLEEP = {1: TbsMode.SLEEPING, 2: TbsMode.SLEEPING}

no_sleep = station_power(PowerProfile(), ACTIVE)
half = station_power(PowerProfile(sleep_depth=SleepDepth.HALF), ASLEEP)
full = station_power(PowerProfile(sleep_depth=SleepDepth.FULL), ASLEEP)

print(f"{'operating point':<12} {'total W':>8} {'saved':>7}")
print(f"{'no sleep':<12} {no_sleep:>8.1f} {0:>6.1%}")
print(f"{'half sleep':<12} {half:>8.1f} {savings(no_sleep, half):>6.1%}")
print(f"{'full sleep':<12} {full:>8.1f} {savings(no_sleep, full):>6.1%}")

# Component view of the full-sleep point.
print("\nfull sleep, per component:")
for component, watts in component_powers(
        PowerProfile(sleep_depth=SleepDepth.FULL), ASLEEP).items():
    print(f"  {component:<10} {watts:>6.1f} W")

# Integrating over a day: stations sleep 16 idle hours out of 24.
profile = PowerProfile(sleep_depth=SleepDepth.FULL)
hour = 3_600_000_000
ledger = EnergyLedger(0)
ledger.accumulate(0, 8 * hour, component_powers(profile, ACTIVE))
ledger.accumulate(8 * hour, 24 * hour, component_powers(profile, ASLEEP))
baseline_wh = no_sleep * 24
print(f"\n24 h with 16 h of sleep: {ledger.total_wh():.0f} Wh"
      f" vs always-on {baseline_wh:.0f} Wh"
      f" -> {savings(baseline_wh, ledger.total_wh()):.1%} saved")
