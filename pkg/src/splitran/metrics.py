"""Metrics: event-log records, their fold into a MetricsBundle, CDF and
CSV export, and invariant re-verification for replay.

The event log is line-delimited JSON, one record per line with an
explicit "type" tag, so runs are diffable with standard tools.  A run's
MetricsBundle is derived purely by folding its records; replaying a
stored log therefore regenerates the bundle exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .energy import EnergyLedger, PowerProfile, SleepDepth, component_powers, savings, station_power
from .station import TbsMode


class EmptySamples(ValueError):
    """A CDF needs at least one sample."""


@dataclass(frozen=True)
class CdfRecord:
    value: float
    cumulative_fraction: float


def export_cdf(samples: Iterable[float]) -> list[CdfRecord]:
    """Empirical CDF over sorted distinct values.

    The fraction at value v is count(samples <= v) / n, so the last
    fraction is always 1.
    """
    data = sorted(samples)
    if not data:
        raise EmptySamples("no samples")
    n = len(data)
    records = []
    for index, value in enumerate(data):
        if index + 1 == n or data[index + 1] != value:
            records.append(CdfRecord(value, (index + 1) / n))
    return records


@dataclass(frozen=True)
class DispatchRecord:
    t_us: int
    ue_id: int
    request_id: int
    attempt: int
    try_index: int
    decision: str  # "serve_cbs" | "dispatch" | "reject"
    tbs_id: Optional[int]
    reason: Optional[str]
    loads: dict[int, float]
    excluded: tuple  # stations already tried (and refused) this attempt
    delay_us: Optional[int]


@dataclass(frozen=True)
class LoadPoint:
    t_us: int
    tbs_id: int
    load_bps: float


@dataclass(frozen=True)
class ModeChange:
    t_us: int
    tbs_id: int
    old: str
    new: str


@dataclass(frozen=True)
class RequestCounters:
    issued: int
    succeeded: int
    failed: int
    in_flight: int


@dataclass(frozen=True)
class ByteAccounting:
    completed_bytes: float
    in_flight_bytes: float
    per_tbs_bytes: dict[int, float]


@dataclass(frozen=True)
class EnergySummary:
    per_component_wh: dict[str, float]
    total_wh: float
    baseline_total_wh: float
    energy_savings_fraction: float
    steady_state_power_w: float
    baseline_power_w: float
    power_savings_fraction: float


@dataclass(frozen=True)
class MetricsBundle:
    seed: int
    horizon_us: int
    scenario: dict
    dispatch_log: tuple
    load_series: tuple
    mode_log: tuple
    delay_samples: tuple
    request_counters: RequestCounters
    byte_accounting: ByteAccounting
    energy: EnergySummary
    stray_acks: int


def _normalize_loads(raw: dict) -> dict[int, float]:
    return {int(k): float(v) for k, v in raw.items()}


def _profile_from_dict(power: dict) -> PowerProfile:
    return PowerProfile(
        cbs_pc_w=power["cbs_pc_w"],
        tbs_pc_active_w=power["tbs_pc_active_w"],
        tbs_pc_software_off_w=power["tbs_pc_software_off_w"],
        tbs_pc_off_w=power["tbs_pc_off_w"],
        usrp_on_w=power["usrp_on_w"],
        usrp_off_w=power["usrp_off_w"],
        switch_w=power["switch_w"],
        sleep_depth=SleepDepth[power["sleep_depth"]],
    )


def _fold_energy(scenario: dict, mode_log: list[ModeChange]) -> EnergySummary:
    profile = _profile_from_dict(scenario["power"])
    horizon = scenario["horizon_us"]
    modes = {s["tbs_id"]: TbsMode[s["initial_mode"]] for s in scenario["stations"]}
    ledger = EnergyLedger(0)
    for change in mode_log:
        ledger.accumulate(ledger.last_update, change.t_us,
                          component_powers(profile, modes))
        modes[change.tbs_id] = TbsMode[change.new]
    ledger.accumulate(ledger.last_update, horizon, component_powers(profile, modes))

    steady = station_power(profile, modes)
    baseline_modes = {tbs_id: TbsMode.ACTIVE for tbs_id in modes}
    baseline_power = station_power(profile, baseline_modes)
    total_wh = ledger.total_wh()
    baseline_wh = baseline_power * horizon / 3_600_000_000.0
    return EnergySummary(
        per_component_wh=ledger.totals_wh(),
        total_wh=total_wh,
        baseline_total_wh=baseline_wh,
        energy_savings_fraction=(
            savings(baseline_wh, total_wh) if baseline_wh > 0 else 0.0),
        steady_state_power_w=steady,
        baseline_power_w=baseline_power,
        power_savings_fraction=(
            savings(baseline_power, steady) if baseline_power > 0 else 0.0),
    )


def fold_records(records: list[dict]) -> MetricsBundle:
    """Aggregate an event-record sequence into a MetricsBundle.

    This is the only way bundles are built, for live runs and replays
    alike, which is what makes the two provably agree.
    """
    if not records or records[0].get("type") != "meta":
        raise ValueError("event log must start with a meta record")
    meta = records[0]
    scenario = meta["scenario"]
    horizon = scenario["horizon_us"]

    dispatch_log: list[DispatchRecord] = []
    load_series: list[LoadPoint] = []
    mode_log: list[ModeChange] = []
    delay_samples: list[int] = []
    outcomes: dict[int, str] = {}  # request_id -> "open" | "succeeded" | "failed"
    session_start: dict[int, dict] = {}
    session_bytes_done = 0.0
    in_flight_bytes = 0.0
    per_tbs_bytes: dict[int, float] = {}
    stray_acks = 0

    for record in records[1:]:
        kind = record["type"]
        if kind == "dispatch":
            rec = DispatchRecord(
                t_us=record["t_us"], ue_id=record["ue_id"],
                request_id=record["request_id"], attempt=record["attempt"],
                try_index=record["try_index"], decision=record["decision"],
                tbs_id=record["tbs_id"], reason=record["reason"],
                loads=_normalize_loads(record["loads"]),
                excluded=tuple(record["excluded"]),
                delay_us=record["delay_us"])
            dispatch_log.append(rec)
            if rec.delay_us is not None:
                delay_samples.append(rec.delay_us)
            outcomes.setdefault(rec.request_id, "open")
            if rec.decision == "serve_cbs":
                outcomes[rec.request_id] = "succeeded"
        elif kind == "load":
            load_series.append(LoadPoint(
                record["t_us"], record["tbs_id"], record["load_bps"]))
        elif kind == "mode":
            mode_log.append(ModeChange(
                record["t_us"], record["tbs_id"], record["old"], record["new"]))
        elif kind == "session_start":
            session_start[record["session_id"]] = record
            outcomes[record["session_id"]] = "succeeded"
        elif kind == "session_end":
            start = session_start.pop(record["session_id"], None)
            if start is None:
                continue
            session_bytes_done += record["bytes"]
            per_tbs = per_tbs_bytes.setdefault(start["tbs_id"], 0.0)
            per_tbs_bytes[start["tbs_id"]] = per_tbs + record["bytes"]
        elif kind == "request_failed":
            outcomes[record["request_id"]] = "failed"
        elif kind == "final":
            stray_acks = record["stray_acks"]

    # Sessions still running at the horizon contribute their accrued bytes.
    for start in session_start.values():
        accrued = start["rate_bps"] * (horizon - start["t_us"]) / 1_000_000
        in_flight_bytes += accrued
        per_tbs = per_tbs_bytes.setdefault(start["tbs_id"], 0.0)
        per_tbs_bytes[start["tbs_id"]] = per_tbs + accrued

    issued = len(outcomes)
    succeeded = sum(1 for o in outcomes.values() if o == "succeeded")
    failed = sum(1 for o in outcomes.values() if o == "failed")
    counters = RequestCounters(
        issued=issued, succeeded=succeeded, failed=failed,
        in_flight=issued - succeeded - failed)

    return MetricsBundle(
        seed=meta["seed"],
        horizon_us=horizon,
        scenario=scenario,
        dispatch_log=tuple(dispatch_log),
        load_series=tuple(load_series),
        mode_log=tuple(mode_log),
        delay_samples=tuple(delay_samples),
        request_counters=counters,
        byte_accounting=ByteAccounting(
            completed_bytes=session_bytes_done,
            in_flight_bytes=in_flight_bytes,
            per_tbs_bytes=per_tbs_bytes),
        energy=_fold_energy(scenario, mode_log),
        stray_acks=stray_acks,
    )


def transition_durations(mode_log: Iterable[ModeChange]) -> dict[str, list[int]]:
    """Setup and close-down spans (us) extracted from the mode log."""
    entered: dict[tuple[int, str], int] = {}
    durations: dict[str, list[int]] = {"setup": [], "close_down": []}
    for change in mode_log:
        entered[(change.tbs_id, change.new)] = change.t_us
        if change.old == "SETTING_UP" and change.new == "ACTIVE":
            start = entered.get((change.tbs_id, "SETTING_UP"))
            if start is not None:
                durations["setup"].append(change.t_us - start)
        elif change.old == "CLOSING_DOWN" and change.new == "SLEEPING":
            start = entered.get((change.tbs_id, "CLOSING_DOWN"))
            if start is not None:
                durations["close_down"].append(change.t_us - start)
    return durations


def mean_std(values: Iterable[float]) -> tuple[float, float]:
    """Population mean and standard deviation."""
    data = list(values)
    if not data:
        return (0.0, 0.0)
    mean = sum(data) / len(data)
    var = sum((x - mean) ** 2 for x in data) / len(data)
    return (mean, math.sqrt(var))


# -- persistence -----------------------------------------------------------


def write_event_log(path: Path, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True))
            handle.write("\n")


def read_event_log(path: Path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: bad record: {exc}") from None
    return records


def _write_csv(path: Path, header: list[str], rows: Iterable[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(str(cell) for cell in row) + "\n")


def _cdf_rows(samples: list) -> list[tuple]:
    if not samples:
        return []
    return [(r.value, r.cumulative_fraction) for r in export_cdf(samples)]


def summary_dict(bundle: MetricsBundle) -> dict:
    """Human-facing run summary: powers at 1 decimal, energies at 3."""
    delay_mean, delay_std = mean_std(bundle.delay_samples)
    counters = bundle.request_counters
    return {
        "seed": bundle.seed,
        "horizon_us": bundle.horizon_us,
        "requests": {
            "issued": counters.issued,
            "succeeded": counters.succeeded,
            "failed": counters.failed,
            "in_flight": counters.in_flight,
        },
        "delay_overhead_us": {
            "count": len(bundle.delay_samples),
            "mean": round(delay_mean, 3),
            "std": round(delay_std, 3),
        },
        "bytes": {
            "completed": round(bundle.byte_accounting.completed_bytes, 3),
            "in_flight": round(bundle.byte_accounting.in_flight_bytes, 3),
        },
        "energy": {
            "per_component_wh": {
                c: round(wh, 3)
                for c, wh in sorted(bundle.energy.per_component_wh.items())
            },
            "total_wh": round(bundle.energy.total_wh, 3),
            "baseline_total_wh": round(bundle.energy.baseline_total_wh, 3),
            "energy_savings_fraction": round(bundle.energy.energy_savings_fraction, 4),
            "steady_state_power_w": round(bundle.energy.steady_state_power_w, 1),
            "baseline_power_w": round(bundle.energy.baseline_power_w, 1),
            "power_savings_fraction": round(bundle.energy.power_savings_fraction, 4),
        },
        "stray_acks": bundle.stray_acks,
    }


def write_outputs(outdir: Path, bundle: MetricsBundle, records: list[dict]) -> None:
    """Write the run's output directory: summary, CSV series, CDFs, log."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_event_log(outdir / "events.log", records)
    with open(outdir / "summary.json", "w", encoding="utf-8", newline="\n") as handle:
        json.dump(summary_dict(bundle), handle, indent=2, sort_keys=True)
        handle.write("\n")
    _write_csv(outdir / "loads.csv", ["time_us", "tbs_id", "load_bps"],
               [(p.t_us, p.tbs_id, p.load_bps) for p in bundle.load_series])
    _write_csv(outdir / "modes.csv", ["time_us", "tbs_id", "old_mode", "new_mode"],
               [(m.t_us, m.tbs_id, m.old, m.new) for m in bundle.mode_log])
    durations = transition_durations(bundle.mode_log)
    _write_csv(outdir / "cdf_delay.csv", ["delay_us", "cumulative_fraction"],
               _cdf_rows(list(bundle.delay_samples)))
    _write_csv(outdir / "cdf_setup.csv", ["setup_us", "cumulative_fraction"],
               _cdf_rows(durations["setup"]))
    _write_csv(outdir / "cdf_closedown.csv", ["closedown_us", "cumulative_fraction"],
               _cdf_rows(durations["close_down"]))


# -- replay verification ----------------------------------------------------

_MODE_EDGES = {
    ("ACTIVE", "CLOSING_DOWN"),
    ("CLOSING_DOWN", "SLEEPING"),
    ("SLEEPING", "SETTING_UP"),
    ("SETTING_UP", "ACTIVE"),
}


def verify_records(records: list[dict]) -> list[str]:
    """Re-check run invariants over a stored event log.

    Returns human-readable violations (empty list = log is consistent):
    clock monotonicity, dispatch-argmin optimality, no dispatch to a
    non-ACTIVE station, station mode-graph legality, command ack/retry
    bounds, load-window recomputation, byte conservation and request
    accounting closure.
    """
    problems: list[str] = []
    if not records or records[0].get("type") != "meta":
        return ["log must start with a meta record"]
    scenario = records[0]["scenario"]
    horizon = scenario["horizon_us"]
    retention = scenario["controller"]["retention_us"]
    ack_timeout = scenario["controller"]["ack_timeout_us"]
    max_retries = scenario["controller"]["max_retries"]

    agent_modes = {s["tbs_id"]: s["initial_mode"] for s in scenario["stations"]}
    report_window: dict[int, list[tuple[int, int]]] = {}
    commands: dict[int, dict] = {}
    open_command: dict[int, int] = {}  # tbs_id -> command_id awaiting ack
    sessions: dict[int, dict] = {}
    sim_tbs_bytes: Optional[dict] = None
    last_t = 0

    for index, record in enumerate(records[1:], start=2):
        t = record["t_us"]
        where = f"line {index} (t={t})"
        if t < last_t:
            problems.append(f"{where}: clock went backwards")
        last_t = t
        kind = record["type"]

        if kind == "dispatch" and record["decision"] == "dispatch":
            loads = _normalize_loads(record["loads"])
            excluded = set(record["excluded"])
            candidates = {i: v for i, v in loads.items() if i not in excluded}
            chosen = record["tbs_id"]
            if chosen in excluded:
                problems.append(
                    f"{where}: dispatched to {chosen}, already refused this attempt")
            elif not candidates:
                problems.append(f"{where}: dispatch with empty load view")
            elif chosen not in candidates:
                problems.append(f"{where}: dispatched to {chosen}, not in view")
            else:
                best = min(candidates, key=lambda i: (candidates[i], i))
                if chosen != best:
                    problems.append(
                        f"{where}: dispatched to {chosen} but least-loaded is {best}")
            if agent_modes.get(chosen) != "ACTIVE":
                problems.append(
                    f"{where}: dispatched to {chosen} whose station mode is "
                    f"{agent_modes.get(chosen)}")
        elif kind == "mode":
            tbs_id = record["tbs_id"]
            old, new = record["old"], record["new"]
            if agent_modes.get(tbs_id) != old:
                problems.append(
                    f"{where}: mode record says old={old} but station was "
                    f"{agent_modes.get(tbs_id)}")
            if (old, new) not in _MODE_EDGES:
                problems.append(f"{where}: illegal mode transition {old}->{new}")
            agent_modes[tbs_id] = new
        elif kind == "report":
            report_window.setdefault(record["tbs_id"], []).append(
                (t, record["data_rate_bps"]))
        elif kind == "load":
            window = report_window.get(record["tbs_id"], [])
            window = [(at, rate) for at, rate in window if at >= t - retention]
            report_window[record["tbs_id"]] = window
            expected = (sum(r for _, r in window) / len(window)) if window else 0.0
            if not math.isclose(expected, record["load_bps"],
                                rel_tol=1e-9, abs_tol=1e-9):
                problems.append(
                    f"{where}: load {record['load_bps']} != window mean {expected}")
        elif kind == "command":
            cid = record["command_id"]
            event = record["event"]
            if event == "issued":
                tbs_id = record["tbs_id"]
                if tbs_id in open_command:
                    problems.append(
                        f"{where}: command {cid} issued to station {tbs_id} "
                        f"while {open_command[tbs_id]} is still pending")
                open_command[tbs_id] = cid
                commands[cid] = {"t": t, "tbs_id": tbs_id, "done": None}
            elif event in ("acked", "unreachable"):
                entry = commands.get(cid)
                if entry is None:
                    problems.append(f"{where}: {event} for unknown command {cid}")
                elif entry["done"] is None:
                    entry["done"] = t
                    if open_command.get(entry["tbs_id"]) == cid:
                        del open_command[entry["tbs_id"]]
                    if t - entry["t"] > max_retries * ack_timeout:
                        problems.append(
                            f"{where}: command {cid} resolved after the "
                            f"{max_retries}x{ack_timeout}us bound")
        elif kind == "session_start":
            sessions[record["session_id"]] = dict(record)
        elif kind == "session_end":
            start = sessions.get(record["session_id"])
            if start is None:
                problems.append(f"{where}: end of unknown session")
            else:
                start["end_us"] = t
                if not math.isclose(record["bytes"], start["size_bytes"],
                                    rel_tol=1e-9, abs_tol=1e-6):
                    problems.append(
                        f"{where}: session delivered {record['bytes']} B, "
                        f"size was {start['size_bytes']} B")
        elif kind == "final":
            sim_tbs_bytes = record["tbs_bytes"]

    for cid, entry in commands.items():
        deadline = entry["t"] + max_retries * ack_timeout
        if entry["done"] is None and deadline <= horizon:
            problems.append(f"command {cid} neither acked nor written off by {deadline}")

    if sim_tbs_bytes is not None:
        recomputed: dict[int, float] = {}
        for start in sessions.values():
            end = min(start.get("end_us", horizon), horizon)
            span = max(0, end - start["t_us"])
            recomputed[start["tbs_id"]] = (
                recomputed.get(start["tbs_id"], 0.0)
                + start["rate_bps"] * span / 1_000_000)
        for key, total in sim_tbs_bytes.items():
            expect = recomputed.get(int(key), 0.0)
            if not math.isclose(total, expect, rel_tol=1e-9, abs_tol=1e-3):
                problems.append(
                    f"station {key} credited {total} B but sessions sum to {expect} B")
    return problems
