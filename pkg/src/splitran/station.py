"""Traffic base station protocol state machine.

A station cycles ACTIVE -> CLOSING_DOWN -> SLEEPING -> SETTING_UP ->
ACTIVE, driven by Sleep/Wake commands from the controller and by its own
transition deadlines.  Waking takes 8.4 s (initialization plus
synchronization); closing down takes 52 ms.  A Sleep received while
sessions are live does not drop them: the station refuses new
assignments and begins closing down once the last session releases.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

from . import wire

SETUP_TIME_US = 8_400_000
CLOSE_DOWN_TIME_US = 52_000


class NotActive(RuntimeError):
    """Operation requires an ACTIVE station."""


class UnknownSession(KeyError):
    """session_id does not occupy any channel."""


class TbsMode(enum.Enum):
    ACTIVE = "ACTIVE"
    CLOSING_DOWN = "CLOSING_DOWN"
    SLEEPING = "SLEEPING"
    SETTING_UP = "SETTING_UP"


@dataclass(frozen=True)
class TbsConfig:
    """Per-station parameters.

    Timeslot 0 of each carrier is reserved for control, so a default
    station exposes 1 x 7 usable packet-data slots.  Transition times are
    fixed means by default; pass samplers to draw them instead.
    """

    arfcn_count: int = 1
    slots_per_arfcn: int = 8
    setup_time_us: int = SETUP_TIME_US
    close_down_time_us: int = CLOSE_DOWN_TIME_US
    report_interval_us: int = 1_000_000
    setup_sampler: Optional[Callable[[], int]] = None
    close_down_sampler: Optional[Callable[[], int]] = None

    def __post_init__(self) -> None:
        if self.arfcn_count < 1 or self.slots_per_arfcn < 2:
            raise ValueError("need at least 1 carrier with 1 usable timeslot")
        if self.report_interval_us <= 0:
            raise ValueError("report_interval_us must be positive")


@dataclass(frozen=True)
class ChannelAssignment:
    arfcn: int
    timeslot: int
    session_id: int


class TbsAgent:
    """One traffic station's protocol state."""

    def __init__(self, tbs_id: int, config: TbsConfig = TbsConfig(),
                 mode: TbsMode = TbsMode.ACTIVE) -> None:
        self.tbs_id = tbs_id
        self.config = config
        self.mode = mode
        # Occupancy over usable (arfcn, timeslot) pairs; None = free.
        self.channels: dict[tuple[int, int], Optional[int]] = {
            (a, t): None
            for a in range(config.arfcn_count)
            for t in range(1, config.slots_per_arfcn)
        }
        self._sessions: dict[int, tuple[int, int]] = {}
        self.transition_deadline: Optional[int] = None
        self.drain_pending = False

    @property
    def busy_count(self) -> int:
        return len(self._sessions)

    def _setup_time(self) -> int:
        s = self.config.setup_sampler
        return s() if s is not None else self.config.setup_time_us

    def _close_down_time(self) -> int:
        s = self.config.close_down_sampler
        return s() if s is not None else self.config.close_down_time_us

    def handle_tbs_request(self, request: wire.TbsRequest, now: int) -> wire.TbsResponse:
        """Assign the lowest free (arfcn, timeslot), or refuse in-band.

        Refusal (assigned=False) covers non-ACTIVE modes, a pending drain
        and a full channel grid.
        """
        if self.mode is not TbsMode.ACTIVE or self.drain_pending:
            return wire.TbsResponse(self.tbs_id, now, request.request_id, False, 0, 0)
        for (arfcn, slot), occupant in self.channels.items():
            if occupant is None:
                self.channels[(arfcn, slot)] = request.request_id
                self._sessions[request.request_id] = (arfcn, slot)
                return wire.TbsResponse(
                    self.tbs_id, now, request.request_id, True, arfcn, slot)
        return wire.TbsResponse(self.tbs_id, now, request.request_id, False, 0, 0)

    def handle_command(self, cmd: "wire.Sleep | wire.Wake", now: int) -> wire.Ack:
        """Apply a Sleep/Wake command; always acknowledge.

        Commands that do not apply to the current mode (Sleep while
        already sleeping, Wake while active, anything mid-transition)
        change nothing but are still acked, which makes controller
        retries harmless.
        """
        if isinstance(cmd, wire.Sleep):
            if self.mode is TbsMode.ACTIVE:
                if self.busy_count == 0:
                    self._begin_close_down(now)
                else:
                    self.drain_pending = True
        elif isinstance(cmd, wire.Wake):
            if self.mode is TbsMode.SLEEPING:
                self.mode = TbsMode.SETTING_UP
                self.transition_deadline = now + self._setup_time()
        else:
            raise TypeError(f"not a station command: {cmd!r}")
        return wire.Ack(self.tbs_id, now, cmd.command_id)

    def _begin_close_down(self, now: int) -> None:
        self.mode = TbsMode.CLOSING_DOWN
        self.drain_pending = False
        self.transition_deadline = now + self._close_down_time()

    def step_transition(self, now: int) -> Optional[wire.LoadReport]:
        """Complete a due transition; deadline is inclusive.

        Returns the mode-change notification to send to the controller
        (a LoadReport snapshot of current state), or None if no
        transition completed.
        """
        if self.transition_deadline is None or now < self.transition_deadline:
            return None
        self.transition_deadline = None
        if self.mode is TbsMode.CLOSING_DOWN:
            self.mode = TbsMode.SLEEPING
        elif self.mode is TbsMode.SETTING_UP:
            self.mode = TbsMode.ACTIVE
        return self._snapshot_report(now)

    def generate_load_report(self, window_bytes: float, now: int) -> wire.LoadReport:
        """Build the periodic load report; only ACTIVE stations report."""
        if self.mode is not TbsMode.ACTIVE:
            raise NotActive(f"tbs {self.tbs_id} is {self.mode.value}")
        rate = int(round(window_bytes * 1_000_000 / self.config.report_interval_us))
        return wire.LoadReport(
            self.tbs_id, now, self.busy_count, self._arfcn_usage(), rate)

    def release_channel(self, session_id: int, now: int) -> None:
        """Free a session's channel; a completed drain starts close-down."""
        try:
            pair = self._sessions.pop(session_id)
        except KeyError:
            raise UnknownSession(session_id) from None
        self.channels[pair] = None
        if self.drain_pending and self.busy_count == 0:
            self._begin_close_down(now)

    def _arfcn_usage(self) -> int:
        return len({arfcn for arfcn, _ in self._sessions.values()})

    def _snapshot_report(self, now: int) -> wire.LoadReport:
        return wire.LoadReport(
            self.tbs_id, now, self.busy_count, self._arfcn_usage(), 0)
