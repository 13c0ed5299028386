"""Independent brute-force oracles used by unit and acceptance tests.

Each oracle re-derives an expected result from first principles (linear
scans, re-filtering, exhaustive candidate checks, Riemann sums) without
touching the implementation paths it is checking.
"""

from __future__ import annotations

import math


def window_mean_oracle(reports: list[tuple[int, int]], now: int,
                       retention_us: int) -> float:
    """Re-filter the full (received_at, rate) history and average it."""
    kept = [rate for at, rate in reports if at >= now - retention_us]
    if not kept:
        return 0.0
    return sum(kept) / len(kept)


def argmin_oracle(loads: dict[int, float]) -> int:
    """Linear scan for the least-loaded id, ties to the lowest id."""
    best = None
    for tbs_id in sorted(loads):
        if best is None or loads[tbs_id] < loads[best]:
            best = tbs_id
    return best


def threshold_oracle(total_load: float, active: int, stations: int,
                     capacity: float, rho_up: float, rho_down: float) -> int:
    """Enumerate every candidate target count and check the hysteresis
    conditions.

    Scale-up: the smallest count whose per-station load fits under
    rho_up * capacity.  Scale-down: the smallest count reachable from
    the current one where every single-station step of the descent keeps
    the redistributed load below rho_down * capacity.
    """
    def per_station(n: int) -> float:
        if total_load <= 0:
            return 0.0
        if n <= 0:
            return math.inf
        return total_load / n

    if per_station(active) > rho_up * capacity:
        for n in range(0, stations + 1):
            if per_station(n) <= rho_up * capacity:
                return n
        return stations
    limit = min(active, stations)
    reachable = [
        n for n in range(0, limit + 1)
        if all(per_station(k - 1) < rho_down * capacity
               for k in range(limit, n, -1))
    ]
    return min(reachable)


def lowest_free_pair_oracle(channels: dict[tuple[int, int], object]):
    """Scan all pairs in (arfcn, timeslot) order for the first free one."""
    for pair in sorted(channels):
        if channels[pair] is None:
            return pair
    return None


def cdf_oracle(samples: list[float]) -> list[tuple[float, float]]:
    """Counting definition: fraction at v is count(samples <= v) / n."""
    n = len(samples)
    return [(v, sum(1 for s in samples if s <= v) / n)
            for v in sorted(set(samples))]


def riemann_energy_oracle(breakpoints: list[int],
                          powers: list[dict[str, float]]) -> dict[str, float]:
    """Sum power x interval over a piecewise-constant timeline.

    breakpoints has one more entry than powers; powers[i] holds on
    [breakpoints[i], breakpoints[i+1]).  Result is watt-microseconds.
    """
    totals: dict[str, float] = {}
    for i, segment in enumerate(powers):
        span = breakpoints[i + 1] - breakpoints[i]
        for component, watts in segment.items():
            totals[component] = totals.get(component, 0.0) + watts * span
    return totals
