"""Control base station brain: global load view, dispatching, sleeping.

The controller keeps a sliding window of load reports per traffic
station, dispatches the least-loaded ACTIVE station for high-rate
requests, and periodically runs a sleeping-control routine whose
algorithm is pluggable behind the SleepPolicy interface.  Sleep/Wake
commands are tracked until acknowledged; a station that never acks is
marked UNREACHABLE.

Every operation is a deterministic transition on the controller state;
ties are always broken by lowest station id so that runs replay exactly.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Protocol

from . import wire
from .channels import LogicalChannel, RequestClass, classify_request


class UnknownTbs(KeyError):
    """Station id never registered with the controller."""


class BelievedMode(enum.Enum):
    """Controller-side belief about a station (the station's own state
    machine may lag by a command delivery or a transition time)."""

    ACTIVE = "ACTIVE"
    SLEEPING = "SLEEPING"
    TRANSITIONING = "TRANSITIONING"
    UNREACHABLE = "UNREACHABLE"


class DecisionKind(enum.Enum):
    SERVE_BY_CBS = "serve_cbs"
    DISPATCH = "dispatch"
    REJECT = "reject"


class RejectReason(enum.Enum):
    ALL_ASLEEP = "all_asleep"
    NO_TBS = "no_tbs"
    BUSY = "busy"


@dataclass(frozen=True)
class DispatchDecision:
    kind: DecisionKind
    tbs_id: Optional[int] = None
    reason: Optional[RejectReason] = None

    @classmethod
    def serve_by_cbs(cls) -> "DispatchDecision":
        return cls(DecisionKind.SERVE_BY_CBS)

    @classmethod
    def dispatch_to(cls, tbs_id: int) -> "DispatchDecision":
        return cls(DecisionKind.DISPATCH, tbs_id=tbs_id)

    @classmethod
    def reject(cls, reason: RejectReason) -> "DispatchDecision":
        return cls(DecisionKind.REJECT, reason=reason)


@dataclass(frozen=True)
class DispatchResult:
    """Decision plus the load snapshot it was based on and any Wake
    commands to ship (all-asleep path)."""

    decision: DispatchDecision
    loads: dict[int, float]
    commands: list[wire.Message]


@dataclass
class LoadSample:
    received_at: int
    slot_usage: int
    arfcn_usage: int
    data_rate_bps: int


@dataclass
class PendingCommand:
    command_id: int
    tbs_id: int
    kind: str  # "sleep" | "wake"
    issued_at: int
    last_sent_at: int
    retries: int = 0


@dataclass
class _TbsRecord:
    mode: BelievedMode
    samples: deque = field(default_factory=deque)
    commanded: Optional[str] = None  # kind of the last Sleep/Wake issued
    command_issued_at: int = -1
    slept_at: int = -1
    pending_id: Optional[int] = None


@dataclass(frozen=True)
class ControllerConfig:
    retention_us: int = 10_000_000
    routine_period_us: int = 5_000_000
    ack_timeout_us: int = 100_000
    max_retries: int = 3
    sleeping_enabled: bool = True


@dataclass(frozen=True)
class PolicySnapshot:
    """What a sleeping policy gets to see: current loads of ACTIVE
    stations, sleep times of SLEEPING ones, and all believed modes."""

    total_load_bps: float
    loads: Mapping[int, float]
    sleeping: Mapping[int, int]
    modes: Mapping[int, BelievedMode]


class SleepPolicy(Protocol):
    def target_active_set(self, snapshot: PolicySnapshot) -> frozenset[int]:
        ...


def _per_station_load(total_load_bps: float, count: int) -> float:
    if total_load_bps <= 0:
        return 0.0
    if count <= 0:
        return math.inf
    return total_load_bps / count


def threshold_target_count(total_load_bps: float, active_count: int,
                           station_count: int, capacity_bps: float,
                           rho_up: float, rho_down: float) -> int:
    """Hysteresis-banded target station count for a given total load.

    Scale up to the smallest count keeping per-station load at or below
    rho_up * capacity; otherwise shed stations one by one while the load
    spread over the remainder would still sit below rho_down * capacity.
    rho_down < rho_up guarantees the result is a fixed point of itself.
    """
    up_threshold = rho_up * capacity_bps
    down_threshold = rho_down * capacity_bps
    if total_load_bps <= 0:
        n_up = 0
    else:
        n_up = math.ceil(total_load_bps / up_threshold)
        if n_up > 0 and total_load_bps <= (n_up - 1) * up_threshold:
            n_up -= 1  # guard against float rounding in the division
    if _per_station_load(total_load_bps, active_count) > up_threshold:
        return min(n_up, station_count)
    target = min(active_count, station_count)
    while target > 0 and _per_station_load(total_load_bps, target - 1) < down_threshold:
        target -= 1
    return target


@dataclass(frozen=True)
class ThresholdPolicy:
    """Default sleeping algorithm: total-load thresholding with
    hysteresis.  Keeps the most-loaded ACTIVE stations and wakes the
    least-recently-slept SLEEPING ones."""

    capacity_bps: float = 16_800.0  # 7 usable slots x 2400 B/s
    rho_up: float = 0.7
    rho_down: float = 0.3

    def __post_init__(self) -> None:
        if not self.capacity_bps > 0:
            raise ValueError("capacity_bps must be positive")
        if not 0 < self.rho_down < self.rho_up <= 1:
            raise ValueError("need 0 < rho_down < rho_up <= 1")

    def target_active_set(self, snapshot: PolicySnapshot) -> frozenset[int]:
        active = sorted(snapshot.loads)
        sleeping = sorted(snapshot.sleeping)
        count = threshold_target_count(
            snapshot.total_load_bps, len(active), len(active) + len(sleeping),
            self.capacity_bps, self.rho_up, self.rho_down)
        keep = sorted(active, key=lambda i: (-snapshot.loads[i], i))[:count]
        if len(keep) < count:
            wake_order = sorted(sleeping, key=lambda i: (snapshot.sleeping[i], i))
            keep.extend(wake_order[:count - len(keep)])
        return frozenset(keep)


class CbsController:
    """Single-threaded controller state machine.

    Methods return the messages to ship; delivery, delays and timers are
    the caller's business (the simulation kernel, or a real transport).
    """

    def __init__(self, config: ControllerConfig = ControllerConfig()) -> None:
        self.config = config
        self._tbs: dict[int, _TbsRecord] = {}
        self._pending: dict[int, PendingCommand] = {}
        self._next_command_id = 1
        self.stray_acks = 0
        self.unreachable_count = 0

    # -- registration and view maintenance --------------------------------

    def register_tbs(self, tbs_id: int, mode: BelievedMode = BelievedMode.ACTIVE,
                     now: int = 0) -> None:
        if tbs_id in self._tbs:
            return
        record = _TbsRecord(mode=mode)
        if mode is BelievedMode.SLEEPING:
            record.slept_at = now
        self._tbs[tbs_id] = record

    def known_tbs(self) -> list[int]:
        return sorted(self._tbs)

    def believed_mode(self, tbs_id: int) -> BelievedMode:
        return self._record(tbs_id).mode

    def pending_commands(self) -> dict[int, PendingCommand]:
        return dict(self._pending)

    def _record(self, tbs_id: int) -> _TbsRecord:
        try:
            return self._tbs[tbs_id]
        except KeyError:
            raise UnknownTbs(tbs_id) from None

    def ingest_load_report(self, report: wire.LoadReport, now: int) -> None:
        """Fold a load report into the view.

        First report from an unknown station registers it as ACTIVE.  A
        report also doubles as the transition-complete notification: for
        a TRANSITIONING station, a report generated after the command was
        issued (and, for sleep, showing zero busy slots) advances the
        believed mode to the commanded terminal mode.
        """
        record = self._tbs.get(report.tbs_id)
        if record is None:
            record = _TbsRecord(mode=BelievedMode.ACTIVE)
            self._tbs[report.tbs_id] = record
        record.samples.append(LoadSample(
            now, report.slot_usage, report.arfcn_usage, report.data_rate_bps))
        self._prune(record, now)
        if record.mode is BelievedMode.TRANSITIONING:
            if report.timestamp_us > record.command_issued_at:
                if record.commanded == "wake":
                    record.mode = BelievedMode.ACTIVE
                elif record.commanded == "sleep" and report.slot_usage == 0:
                    record.mode = BelievedMode.SLEEPING
                    record.slept_at = now
        elif record.mode is BelievedMode.UNREACHABLE:
            # The station is evidently alive again; let it rejoin.
            record.mode = BelievedMode.ACTIVE

    def _prune(self, record: _TbsRecord, now: int) -> None:
        horizon = now - self.config.retention_us
        while record.samples and record.samples[0].received_at < horizon:
            record.samples.popleft()

    def compute_load(self, tbs_id: int, now: int) -> float:
        """Mean reported data rate (B/s) over the retention window; a
        station with no in-window samples has load 0."""
        record = self._record(tbs_id)
        self._prune(record, now)
        if not record.samples:
            return 0.0
        return sum(s.data_rate_bps for s in record.samples) / len(record.samples)

    def loads(self, now: int) -> dict[int, float]:
        """Current load of every believed-ACTIVE station."""
        return {
            tbs_id: self.compute_load(tbs_id, now)
            for tbs_id in sorted(self._tbs)
            if self._tbs[tbs_id].mode is BelievedMode.ACTIVE
        }

    # -- dispatching -------------------------------------------------------

    def dispatch(self, channel: LogicalChannel, now: int,
                 exclude: Iterable[int] = ()) -> DispatchResult:
        """Decide who serves a channel request.

        Low-rate channels are served locally.  High-rate channels go to
        the least-loaded ACTIVE station (ties to the lowest id).  With no
        ACTIVE station the request is rejected, and if any station is
        SLEEPING the least-recently-slept one is woken so that a UE
        retransmission finds the network awake.
        """
        if classify_request(channel.standard, channel.name) is RequestClass.LOW_RATE:
            return DispatchResult(DispatchDecision.serve_by_cbs(), {}, [])
        excluded = frozenset(exclude)
        loads = self.loads(now)
        candidates = [i for i in loads if i not in excluded]
        if candidates:
            chosen = min(candidates, key=lambda i: (loads[i], i))
            return DispatchResult(DispatchDecision.dispatch_to(chosen), loads, [])
        if not self._tbs:
            return DispatchResult(
                DispatchDecision.reject(RejectReason.NO_TBS), loads, [])
        commands: list[wire.Message] = []
        if not loads:
            # Nothing is awake at all: wake the least-recently-slept
            # station so a retransmission finds it serving.  Stations
            # with a command still unacknowledged are left alone.
            sleeping = {
                i: r.slept_at for i, r in self._tbs.items()
                if r.mode is BelievedMode.SLEEPING and r.pending_id is None
            }
            if sleeping:
                to_wake = min(sleeping, key=lambda i: (sleeping[i], i))
                commands.append(self._issue_command(to_wake, "wake", now))
            reason = RejectReason.ALL_ASLEEP
        else:
            # Awake stations exist but every one we tried refused.
            reason = RejectReason.BUSY
        return DispatchResult(DispatchDecision.reject(reason), loads, commands)

    # -- sleeping control --------------------------------------------------

    def sleeping_routine(self, policy: SleepPolicy, now: int) -> list[wire.Message]:
        """Run one sleeping-control cycle; returns Sleep/Wake commands.

        Stations mid-transition are skipped this cycle.  Running the
        routine twice at the same instant emits nothing the second time,
        because every commanded station has become TRANSITIONING.
        """
        if not self.config.sleeping_enabled:
            return []
        loads = self.loads(now)
        sleeping = {
            i: r.slept_at for i, r in self._tbs.items()
            if r.mode is BelievedMode.SLEEPING
        }
        snapshot = PolicySnapshot(
            total_load_bps=sum(loads.values()),
            loads=loads,
            sleeping=sleeping,
            modes={i: r.mode for i, r in self._tbs.items()},
        )
        target = policy.target_active_set(snapshot)
        unknown = target - set(self._tbs)
        if unknown:
            raise UnknownTbs(f"policy targeted unknown stations {sorted(unknown)}")
        commands: list[wire.Message] = []
        for tbs_id in sorted(self._tbs):
            record = self._tbs[tbs_id]
            if record.pending_id is not None:
                continue
            if record.mode is BelievedMode.ACTIVE and tbs_id not in target:
                commands.append(self._issue_command(tbs_id, "sleep", now))
            elif record.mode is BelievedMode.SLEEPING and tbs_id in target:
                commands.append(self._issue_command(tbs_id, "wake", now))
        return commands

    def _issue_command(self, tbs_id: int, kind: str, now: int) -> wire.Message:
        record = self._record(tbs_id)
        assert record.pending_id is None, "one pending command per station"
        command_id = self._next_command_id
        self._next_command_id += 1
        self._pending[command_id] = PendingCommand(
            command_id, tbs_id, kind, issued_at=now, last_sent_at=now)
        record.pending_id = command_id
        record.commanded = kind
        record.command_issued_at = now
        record.mode = BelievedMode.TRANSITIONING
        cls = wire.Sleep if kind == "sleep" else wire.Wake
        return cls(tbs_id, now, command_id)

    # -- acknowledgment tracking -------------------------------------------

    def handle_ack(self, ack: wire.Ack, now: int) -> bool:
        """Clear the matching pending command; True if one matched.

        The believed mode stays TRANSITIONING until the station's
        transition-complete report arrives.  Unmatched acks are counted,
        not errors."""
        pending = self._pending.pop(ack.acked_command_id, None)
        if pending is None:
            self.stray_acks += 1
            return False
        record = self._tbs.get(pending.tbs_id)
        if record is not None and record.pending_id == pending.command_id:
            record.pending_id = None
        return True

    def handle_ack_timeout(self, command_id: int, now: int
                           ) -> tuple[str, Optional[wire.Message]]:
        """React to an ack timer firing for one command.

        Returns ("acked", None) if nothing is pending anymore,
        ("resend", message) when the command should be retransmitted, or
        ("unreachable", None) once max_retries timeouts have elapsed, at
        which point the station is written off.
        """
        pending = self._pending.get(command_id)
        if pending is None:
            return ("acked", None)
        pending.retries += 1
        if pending.retries >= self.config.max_retries:
            del self._pending[command_id]
            record = self._tbs.get(pending.tbs_id)
            if record is not None:
                record.pending_id = None
                record.mode = BelievedMode.UNREACHABLE
            self.unreachable_count += 1
            return ("unreachable", None)
        pending.last_sent_at = now
        cls = wire.Sleep if pending.kind == "sleep" else wire.Wake
        return ("resend", cls(pending.tbs_id, now, command_id))
