"""
Whole-scenario runs
===================

Drive the bundled scenarios through the library and read the headline
numbers out of each MetricsBundle: steady-state power and savings for
the sleep scenarios, signaling-delay statistics for the dispatch-heavy
one, and the load-balancing convergence trace.
"""

from pathlib import Path

from splitran import load_scenario, run
from splitran.metrics import mean_std

SCENARIOS = Path(__file__).parent.parent / "scenarios"


def bundle_for(name):
    return run(load_scenario(SCENARIOS / f"{name}.toml"))


# Power table: the three idle two-station scenarios.
print("steady-state power and savings vs no-sleep baseline")
for name in ("no_sleep", "half_sleep", "full_sleep"):
    energy = bundle_for(name).energy
    print(f"  {name:<12} {energy.steady_state_power_w:>6.1f} W"
          f"   saved {energy.power_savings_fraction:>6.1%}")

# Signaling delay over 12 000 dispatches.
bundle = bundle_for("delay_overhead")
mean, std = mean_std(bundle.delay_samples)
print(f"\ndelay overhead: {len(bundle.delay_samples)} dispatches,"
      f" mean {mean / 1000:.3f} ms, std {std / 1000:.3f} ms")

# Load balancing: station 2 appears at t=30 s and absorbs the new
# sessions until the computed loads meet.
bundle = bundle_for("load_balance")
print("\nload balancing (B/s, sampled every 30 s):")
print(f"  {'t (s)':>6} {'station 1':>10} {'station 2':>10}")
latest = {}
next_sample = 0
for point in bundle.load_series:
    latest[point.tbs_id] = point.load_bps
    if point.t_us >= next_sample:
        print(f"  {point.t_us / 1e6:>6.0f} {latest.get(1, 0):>10.0f}"
              f" {latest.get(2, 0):>10.0f}")
        next_sample += 30_000_000
final_diff = abs(latest[1] - latest[2])
print(f"final imbalance: {final_diff:.0f} B/s"
      f" (one session is {bundle.scenario['ues'][0]['session_rate_bps']:.0f} B/s)")

# Wake on demand: the request stream survives an 8.4 s setup.
bundle = bundle_for("wake_on_demand")
counters = bundle.request_counters
print(f"\nwake on demand: {counters.succeeded}/{counters.issued} requests"
      f" served after waking a sleeping station")
