"""Deterministic discrete-event kernel and scenario orchestration.

Time is integer microseconds.  Events execute in (time, sequence) order,
so equal-time events run in insertion order and a (scenario, seed) pair
always produces the same event-record log.  Randomness comes from named
per-component streams (backhaul, loss, one per UE) derived from the run
seed, so adding a UE never perturbs the other streams.

The measured signaling overhead of a dispatch (mean 360 us, std 100 us)
covers the whole controller<->station interaction, so one sampled delay
stands for a full round trip: a command or request lands at t + delay
and its response/ack is back at the controller at the same instant.
One-way traffic (load reports) also rides one sample.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import wire
from .channels import LogicalChannel
from .controller import (BelievedMode, CbsController, DecisionKind,
                         DispatchResult)
from .metrics import MetricsBundle, fold_records
from .scenario import (BackhaulModel, InvalidScenario, Scenario, UeSpec,
                       scenario_to_dict, validate_scenario)
from .station import TbsAgent, TbsConfig, TbsMode


class PastEvent(ValueError):
    """Events cannot be scheduled before the current clock."""


@dataclass(frozen=True)
class Delivery:
    """A backhaul message landing at its destination."""
    dest: str  # "cbs" | "tbs"
    tbs_id: Optional[int]
    message: wire.Message


@dataclass(frozen=True)
class UeRequest:
    ue_id: int
    request_id: int
    attempt: int


@dataclass(frozen=True)
class UeSessionEnd:
    session_id: int


@dataclass(frozen=True)
class AckTimer:
    command_id: int


@dataclass(frozen=True)
class ReportTick:
    tbs_id: int


@dataclass(frozen=True)
class RoutineTick:
    pass


@dataclass(frozen=True)
class TransitionDue:
    tbs_id: int


class EventQueue:
    """Min-heap over (time, sequence); sequence breaks ties by insertion."""

    def __init__(self) -> None:
        self._heap: list[tuple[int, int, object]] = []
        self._seq = 0
        self.now = 0

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, time_us: int, event: object) -> None:
        if time_us < self.now:
            raise PastEvent(f"event at {time_us} is before clock {self.now}")
        heapq.heappush(self._heap, (time_us, self._seq, event))
        self._seq += 1

    def peek_time(self) -> int:
        return self._heap[0][0]

    def pop(self) -> tuple[int, object]:
        time_us, _, event = heapq.heappop(self._heap)
        self.now = time_us
        return time_us, event


def component_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent, reproducible stream for one stochastic component."""
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def sample_backhaul_delay(rng: np.random.Generator, model: BackhaulModel) -> int:
    """Draw one signaling delay in us; negative draws are retried, then
    clamped to zero after 100 attempts."""
    if model.overhead_std_us == 0:
        return max(0, int(round(model.overhead_mean_us)))
    for _ in range(100):
        sample = rng.normal(model.overhead_mean_us, model.overhead_std_us)
        if sample >= 0:
            return int(round(sample))
    return 0


@dataclass
class _RequestState:
    request_id: int
    ue: UeSpec
    channel: LogicalChannel
    size_bytes: float
    attempt: int = 1
    tried: set = field(default_factory=set)


@dataclass
class _SessionState:
    session_id: int
    ue_id: int
    tbs_id: int
    rate_bps: float
    size_bytes: float
    start_us: int
    end_us: int


class Simulation:
    """One scenario run; single-threaded, fully deterministic."""

    def __init__(self, scenario: Scenario, seed: Optional[int] = None) -> None:
        validate_scenario(scenario)
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        if self.seed < 0:
            raise InvalidScenario(["seed: must be >= 0"])
        self.queue = EventQueue()
        self.records: list[dict] = []
        self.controller = CbsController(scenario.controller)
        self.policy = scenario.policy
        self.backhaul = scenario.backhaul
        self.horizon = scenario.horizon_us

        self.agents: dict[int, TbsAgent] = {}
        self._station_spec = {t.tbs_id: t for t in scenario.stations}
        for spec in scenario.stations:
            config = TbsConfig(
                arfcn_count=spec.arfcn_count,
                slots_per_arfcn=spec.slots_per_arfcn,
                setup_time_us=spec.setup_time_us,
                close_down_time_us=spec.close_down_time_us,
                report_interval_us=spec.report_interval_us,
            )
            self.agents[spec.tbs_id] = TbsAgent(spec.tbs_id, config,
                                                mode=spec.initial_mode)

        self._ue = {u.ue_id: u for u in scenario.ues}
        self._backhaul_rng = component_rng(self.seed, 0)
        self._loss_rng = component_rng(self.seed, 2)
        self._ue_rng = {u.ue_id: component_rng(self.seed, 1, u.ue_id)
                        for u in scenario.ues}

        self._requests: dict[int, _RequestState] = {}
        self._sessions: dict[int, _SessionState] = {}
        self._tbs_sessions: dict[int, list[int]] = {t.tbs_id: [] for t in scenario.stations}
        self._window_bytes: dict[int, float] = {t.tbs_id: 0.0 for t in scenario.stations}
        self._accrued_bytes: dict[int, float] = {t.tbs_id: 0.0 for t in scenario.stations}
        self._accrue_mark: dict[int, int] = {t.tbs_id: 0 for t in scenario.stations}
        self._next_request_id = 1
        self._ran = False

    # -- helpers ------------------------------------------------------------

    def _rec(self, record_type: str, **fields) -> None:
        record = {"type": record_type, "t_us": self.queue.now}
        record.update(fields)
        self.records.append(record)

    def _schedule(self, time_us: int, event: object) -> None:
        self.queue.schedule(time_us, event)

    def _delay(self) -> int:
        return sample_backhaul_delay(self._backhaul_rng, self.backhaul)

    def _command_lost(self) -> bool:
        p = self.backhaul.loss_probability
        return p > 0 and float(self._loss_rng.random()) < p

    # -- bootstrap ----------------------------------------------------------

    def _bootstrap(self) -> None:
        self._rec("meta", version=1, seed=self.seed,
                  scenario=scenario_to_dict(self.scenario))
        for spec in self.scenario.stations:
            if spec.start_us == 0:
                believed = (BelievedMode.SLEEPING
                            if spec.initial_mode is TbsMode.SLEEPING
                            else BelievedMode.ACTIVE)
                self.controller.register_tbs(spec.tbs_id, believed, now=0)
            self._schedule(spec.start_us, ReportTick(spec.tbs_id))
        if self.scenario.controller.sleeping_enabled:
            period = self.scenario.controller.routine_period_us
            if period > 0 and period <= self.horizon:
                self._schedule(period, RoutineTick())
        for ue in self.scenario.ues:
            self._schedule_birth(ue, ue.start_us)

    def _schedule_birth(self, ue: UeSpec, after_us: int) -> None:
        gap = ue.arrival_us.sample(self._ue_rng[ue.ue_id])
        born = after_us + max(1, int(round(gap)))
        if ue.stop_us is not None and born > ue.stop_us:
            return
        if born > self.horizon:
            return
        request_id = self._next_request_id
        self._next_request_id += 1
        size = max(1.0, float(ue.session_size_bytes.sample(self._ue_rng[ue.ue_id])))
        self._requests[request_id] = _RequestState(
            request_id, ue, LogicalChannel.parse(ue.channel), size)
        self._schedule(born, UeRequest(ue.ue_id, request_id, 1))

    # -- main loop ----------------------------------------------------------

    def run(self) -> MetricsBundle:
        if self._ran:
            raise RuntimeError("a Simulation object runs once; build a new one")
        self._ran = True
        self._bootstrap()
        while len(self.queue) and self.queue.peek_time() <= self.horizon:
            _, event = self.queue.pop()
            self._handle(event)
        self.queue.now = self.horizon
        self._finalize()
        return fold_records(self.records)

    def _handle(self, event: object) -> None:
        now = self.queue.now
        if isinstance(event, ReportTick):
            self._on_report_tick(event.tbs_id, now)
        elif isinstance(event, RoutineTick):
            self._on_routine_tick(now)
        elif isinstance(event, Delivery):
            self._on_delivery(event, now)
        elif isinstance(event, UeRequest):
            self._on_ue_request(event, now)
        elif isinstance(event, UeSessionEnd):
            self._on_session_end(event.session_id, now)
        elif isinstance(event, AckTimer):
            self._on_ack_timer(event.command_id, now)
        elif isinstance(event, TransitionDue):
            self._on_transition_due(event.tbs_id, now)
        else:
            raise TypeError(f"unknown event {event!r}")

    def _finalize(self) -> None:
        for tbs_id in self.agents:
            self._accrue(tbs_id, self.horizon)
        self._rec("final",
                  tbs_bytes={str(t): self._accrued_bytes[t]
                             for t in sorted(self._accrued_bytes)},
                  stray_acks=self.controller.stray_acks)

    # -- byte accrual ---------------------------------------------------------

    def _accrue(self, tbs_id: int, upto_us: int) -> None:
        """Integrate session bytes on a station from the last mark to now."""
        mark = self._accrue_mark[tbs_id]
        if upto_us <= mark:
            return
        alive = []
        for session_id in self._tbs_sessions[tbs_id]:
            session = self._sessions[session_id]
            begin = max(mark, session.start_us)
            end = min(upto_us, session.end_us)
            if end > begin:
                bytes_ = session.rate_bps * (end - begin) / 1_000_000
                self._window_bytes[tbs_id] += bytes_
                self._accrued_bytes[tbs_id] += bytes_
            if session.end_us > upto_us:
                alive.append(session_id)
        self._tbs_sessions[tbs_id] = alive
        self._accrue_mark[tbs_id] = upto_us

    # -- station-side events --------------------------------------------------

    def _on_report_tick(self, tbs_id: int, now: int) -> None:
        agent = self.agents[tbs_id]
        self._accrue(tbs_id, now)
        window = self._window_bytes[tbs_id]
        self._window_bytes[tbs_id] = 0.0
        if agent.mode is TbsMode.ACTIVE:
            report = agent.generate_load_report(window, now)
            self._ship_report(report, now)
        next_tick = now + agent.config.report_interval_us
        if next_tick <= self.horizon:
            self._schedule(next_tick, ReportTick(tbs_id))

    def _on_transition_due(self, tbs_id: int, now: int) -> None:
        agent = self.agents[tbs_id]
        before = agent.mode
        notification = agent.step_transition(now)
        if notification is None:
            return
        self._rec("mode", tbs_id=tbs_id, old=before.value, new=agent.mode.value)
        self._ship_report(notification, now)

    def _after_agent_mutation(self, tbs_id: int, before: TbsMode, now: int) -> None:
        agent = self.agents[tbs_id]
        if agent.mode is before:
            return
        self._rec("mode", tbs_id=tbs_id, old=before.value, new=agent.mode.value)
        if agent.transition_deadline is not None:
            self._schedule(agent.transition_deadline, TransitionDue(tbs_id))

    def _ship_report(self, report: wire.LoadReport, now: int) -> None:
        self._schedule(now + self._delay(), Delivery("cbs", None, report))

    # -- controller-side events ------------------------------------------------

    def _on_routine_tick(self, now: int) -> None:
        commands = self.controller.sleeping_routine(self.policy, now)
        self._send_commands(commands, now)
        next_tick = now + self.scenario.controller.routine_period_us
        if next_tick <= self.horizon:
            self._schedule(next_tick, RoutineTick())

    def _send_commands(self, commands: list, now: int) -> None:
        for message in commands:
            kind = "sleep" if isinstance(message, wire.Sleep) else "wake"
            self._rec("command", command_id=message.command_id,
                      tbs_id=message.tbs_id, kind=kind, event="issued")
            self._ship_command(message, now)
            self._schedule(now + self.scenario.controller.ack_timeout_us,
                           AckTimer(message.command_id))

    def _ship_command(self, message: wire.Message, now: int) -> None:
        if self._command_lost():
            self._rec("command", command_id=message.command_id,
                      tbs_id=message.tbs_id,
                      kind="sleep" if isinstance(message, wire.Sleep) else "wake",
                      event="lost")
            return
        self._schedule(now + self._delay(),
                       Delivery("tbs", message.tbs_id, message))

    def _on_ack_timer(self, command_id: int, now: int) -> None:
        pending = self.controller.pending_commands().get(command_id)
        outcome, message = self.controller.handle_ack_timeout(command_id, now)
        if outcome == "resend":
            assert message is not None
            self._rec("command", command_id=command_id, tbs_id=message.tbs_id,
                      kind="sleep" if isinstance(message, wire.Sleep) else "wake",
                      event="resent")
            self._ship_command(message, now)
            self._schedule(now + self.scenario.controller.ack_timeout_us,
                           AckTimer(command_id))
        elif outcome == "unreachable":
            self._rec("command", command_id=command_id,
                      tbs_id=pending.tbs_id if pending else None,
                      kind=pending.kind if pending else None,
                      event="unreachable")

    # -- deliveries -------------------------------------------------------------

    def _on_delivery(self, delivery: Delivery, now: int) -> None:
        message = delivery.message
        if delivery.dest == "cbs":
            if isinstance(message, wire.LoadReport):
                self.controller.ingest_load_report(message, now)
                self._rec("report", tbs_id=message.tbs_id,
                          generated_us=message.timestamp_us,
                          slot_usage=message.slot_usage,
                          arfcn_usage=message.arfcn_usage,
                          data_rate_bps=message.data_rate_bps)
                self._rec("load", tbs_id=message.tbs_id,
                          load_bps=self.controller.compute_load(message.tbs_id, now))
            else:
                raise TypeError(f"unexpected controller-bound {message!r}")
            return
        agent = self.agents[delivery.tbs_id]
        if isinstance(message, (wire.Sleep, wire.Wake)):
            before = agent.mode
            ack = agent.handle_command(message, now)
            self._after_agent_mutation(delivery.tbs_id, before, now)
            # The sampled delay covered the round trip: ack lands now.
            if self._command_lost():
                self._rec("command", command_id=message.command_id,
                          tbs_id=message.tbs_id,
                          kind="sleep" if isinstance(message, wire.Sleep) else "wake",
                          event="ack_lost")
            else:
                matched = self.controller.handle_ack(ack, now)
                self._rec("command", command_id=ack.acked_command_id,
                          tbs_id=message.tbs_id,
                          kind="sleep" if isinstance(message, wire.Sleep) else "wake",
                          event="acked" if matched else "stray_ack")
        elif isinstance(message, wire.TbsRequest):
            response = agent.handle_tbs_request(message, now)
            self._rec("assign", request_id=message.request_id,
                      tbs_id=delivery.tbs_id, assigned=response.assigned,
                      arfcn=response.arfcn, timeslot=response.timeslot)
            self._on_tbs_response(response, now)
        else:
            raise TypeError(f"unexpected station-bound {message!r}")

    # -- UE and dispatch flow -----------------------------------------------------

    def _on_ue_request(self, event: UeRequest, now: int) -> None:
        state = self._requests[event.request_id]
        state.attempt = event.attempt
        state.tried.clear()
        if event.attempt == 1:
            self._schedule_birth(state.ue, now)
        self._try_dispatch(state, now, try_index=0)

    def _try_dispatch(self, state: _RequestState, now: int, try_index: int) -> None:
        excluded = sorted(state.tried)
        result: DispatchResult = self.controller.dispatch(
            state.channel, now, exclude=state.tried)
        self._send_commands(result.commands, now)
        decision = result.decision
        loads = {str(k): v for k, v in result.loads.items()}
        if decision.kind is DecisionKind.SERVE_BY_CBS:
            self._rec("dispatch", ue_id=state.ue.ue_id,
                      request_id=state.request_id, attempt=state.attempt,
                      try_index=try_index, decision="serve_cbs", tbs_id=None,
                      reason=None, loads=loads, excluded=excluded, delay_us=None)
            del self._requests[state.request_id]
        elif decision.kind is DecisionKind.DISPATCH:
            delay = self._delay()
            self._rec("dispatch", ue_id=state.ue.ue_id,
                      request_id=state.request_id, attempt=state.attempt,
                      try_index=try_index, decision="dispatch",
                      tbs_id=decision.tbs_id, reason=None, loads=loads,
                      excluded=excluded, delay_us=delay)
            state.tried.add(decision.tbs_id)
            request = wire.TbsRequest(decision.tbs_id, now, state.request_id)
            self._schedule(now + delay, Delivery("tbs", decision.tbs_id, request))
        else:
            self._rec("dispatch", ue_id=state.ue.ue_id,
                      request_id=state.request_id, attempt=state.attempt,
                      try_index=try_index, decision="reject", tbs_id=None,
                      reason=decision.reason.value, loads=loads,
                      excluded=excluded, delay_us=None)
            self._attempt_failed(state, now)

    def _on_tbs_response(self, response: wire.TbsResponse, now: int) -> None:
        state = self._requests.get(response.request_id)
        if state is None:
            return
        if response.assigned:
            self._start_session(state, response, now)
        elif len(state.tried) < 2:
            # One retry with the next-least-loaded station, then give up.
            self._try_dispatch(state, now, try_index=1)
        else:
            self._attempt_failed(state, now)

    def _start_session(self, state: _RequestState, response: wire.TbsResponse,
                       now: int) -> None:
        rate = state.ue.session_rate_bps
        duration = max(1, int(round(state.size_bytes * 1_000_000 / rate)))
        session = _SessionState(
            session_id=state.request_id, ue_id=state.ue.ue_id,
            tbs_id=response.tbs_id, rate_bps=rate,
            size_bytes=state.size_bytes, start_us=now, end_us=now + duration)
        self._sessions[session.session_id] = session
        self._tbs_sessions[response.tbs_id].append(session.session_id)
        self._rec("session_start", session_id=session.session_id,
                  ue_id=session.ue_id, tbs_id=session.tbs_id,
                  arfcn=response.arfcn, timeslot=response.timeslot,
                  size_bytes=session.size_bytes, rate_bps=rate)
        self._schedule(session.end_us, UeSessionEnd(session.session_id))
        del self._requests[state.request_id]

    def _on_session_end(self, session_id: int, now: int) -> None:
        session = self._sessions[session_id]
        agent = self.agents[session.tbs_id]
        before = agent.mode
        agent.release_channel(session_id, now)
        self._after_agent_mutation(session.tbs_id, before, now)
        self._rec("session_end", session_id=session_id,
                  tbs_id=session.tbs_id, bytes=session.size_bytes)

    def _attempt_failed(self, state: _RequestState, now: int) -> None:
        ue = state.ue
        if state.attempt <= ue.max_retransmits:
            retry_at = now + ue.retransmit_interval_us
            if retry_at <= self.horizon:
                self._schedule(retry_at,
                               UeRequest(ue.ue_id, state.request_id,
                                         state.attempt + 1))
            # Past the horizon the request simply stays in flight.
        else:
            self._rec("request_failed", ue_id=ue.ue_id,
                      request_id=state.request_id, attempts=state.attempt)
            del self._requests[state.request_id]


def run(scenario: Scenario, seed: Optional[int] = None) -> MetricsBundle:
    """Execute a scenario to its horizon and return the folded metrics."""
    return Simulation(scenario, seed).run()
