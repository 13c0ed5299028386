"""Scenario configuration: typed specs plus a strict TOML loader.

A scenario file is versioned TOML with nested sections; unknown keys are
rejected so that typos fail loudly instead of silently falling back to
defaults.  Times are written in human units (seconds, milliseconds) and
converted to integer microseconds at load.  Scenarios can equally be
built programmatically from the dataclasses below.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .controller import ControllerConfig, ThresholdPolicy
from .energy import PowerProfile, SleepDepth
from .channels import InvalidChannel, LogicalChannel
from .station import CLOSE_DOWN_TIME_US, SETUP_TIME_US, TbsMode

SCHEMA_VERSION = 1


class InvalidScenario(ValueError):
    """Scenario failed validation; carries field-level diagnostics."""

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


@dataclass(frozen=True)
class BackhaulModel:
    """Wired-link signaling delay: normal, redrawn (then clamped) at zero.

    Defaults follow the measured overhead: 0.36 ms mean, 0.1 ms spread.
    Loss applies to command/ack traffic only and is off by default.
    """

    overhead_mean_us: float = 360.0
    overhead_std_us: float = 100.0
    loss_probability: float = 0.0

    def __post_init__(self) -> None:
        if self.overhead_mean_us < 0 or self.overhead_std_us < 0:
            raise ValueError("backhaul delay parameters must be >= 0")
        if not 0 <= self.loss_probability < 1:
            raise ValueError("loss_probability must be in [0, 1)")


@dataclass(frozen=True)
class Dist:
    """One-parameter family of scalar distributions for scenario knobs."""

    kind: str  # "fixed" | "exponential" | "uniform"
    a: float
    b: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("fixed", "exponential", "uniform"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "uniform" and self.b < self.a:
            raise ValueError("uniform needs low <= high")
        if self.a < 0 or self.b < 0:
            raise ValueError("distribution parameters must be >= 0")

    def sample(self, rng) -> float:
        if self.kind == "fixed":
            return self.a
        if self.kind == "exponential":
            return float(rng.exponential(self.a))
        return float(rng.uniform(self.a, self.b))

    def mean(self) -> float:
        if self.kind == "uniform":
            return (self.a + self.b) / 2
        return self.a


@dataclass(frozen=True)
class TbsSpec:
    tbs_id: int
    arfcn_count: int = 1
    slots_per_arfcn: int = 8
    setup_time_us: int = SETUP_TIME_US
    close_down_time_us: int = CLOSE_DOWN_TIME_US
    report_interval_us: int = 1_000_000
    start_us: int = 0
    initial_mode: TbsMode = TbsMode.ACTIVE


@dataclass(frozen=True)
class UeSpec:
    ue_id: int
    channel: str = "GSM_GPRS:PDTCH"
    arrival_us: Dist = Dist("exponential", 3_000_000.0)
    session_size_bytes: Dist = Dist("fixed", 16_800.0)
    session_rate_bps: float = 2_400.0
    retransmit_interval_us: int = 2_000_000
    max_retransmits: int = 10
    start_us: int = 0
    stop_us: Optional[int] = None


@dataclass(frozen=True)
class Scenario:
    horizon_us: int
    seed: int = 0
    controller: ControllerConfig = ControllerConfig()
    policy: ThresholdPolicy = ThresholdPolicy()
    backhaul: BackhaulModel = BackhaulModel()
    power: PowerProfile = PowerProfile()
    stations: tuple[TbsSpec, ...] = ()
    ues: tuple[UeSpec, ...] = ()


def validate_scenario(scenario: Scenario) -> None:
    """Cross-field checks shared by the loader and programmatic use."""
    problems = []
    if scenario.horizon_us <= 0:
        problems.append("sim.horizon_s: must be positive")
    if scenario.seed < 0:
        problems.append("sim.seed: must be >= 0")
    if scenario.controller.ack_timeout_us <= 0:
        problems.append("controller.ack_timeout_ms: must be positive")
    if scenario.controller.max_retries < 1:
        problems.append("controller.max_retries: must be >= 1")
    if (scenario.controller.sleeping_enabled
            and scenario.controller.routine_period_us <= 0):
        problems.append("controller.routine_period_s: must be positive "
                        "while sleeping is enabled")
    if scenario.controller.retention_us < 0:
        problems.append("controller.retention_s: must be >= 0")
    ids = [t.tbs_id for t in scenario.stations]
    if len(ids) != len(set(ids)):
        problems.append("tbs: duplicate station ids")
    for t in scenario.stations:
        if t.tbs_id < 0 or t.tbs_id > 0xFFFF:
            problems.append(f"tbs[{t.tbs_id}]: id must fit in 16 bits")
        if t.initial_mode not in (TbsMode.ACTIVE, TbsMode.SLEEPING):
            problems.append(f"tbs[{t.tbs_id}]: initial_mode must be ACTIVE or SLEEPING")
        if t.report_interval_us <= 0:
            problems.append(f"tbs[{t.tbs_id}].report_interval_s: must be positive")
        if t.arfcn_count < 1 or t.slots_per_arfcn < 2:
            problems.append(f"tbs[{t.tbs_id}]: need >= 1 carrier with >= 1 usable slot")
        if t.setup_time_us < 0 or t.close_down_time_us < 0:
            problems.append(f"tbs[{t.tbs_id}]: transition times must be >= 0")
    ue_ids = [u.ue_id for u in scenario.ues]
    if len(ue_ids) != len(set(ue_ids)):
        problems.append("ue: duplicate ue ids")
    for u in scenario.ues:
        prefix = f"ue[{u.ue_id}]"
        try:
            LogicalChannel.parse(u.channel)
        except InvalidChannel as exc:
            problems.append(f"{prefix}.channel: {exc}")
        if u.retransmit_interval_us <= 0:
            problems.append(f"{prefix}.retransmit_interval_s: must be positive")
        if u.session_rate_bps <= 0:
            problems.append(f"{prefix}.session_rate_bps: must be positive")
        if u.arrival_us.mean() <= 0:
            problems.append(f"{prefix}.arrival: mean must be positive")
        if u.session_size_bytes.mean() <= 0:
            problems.append(f"{prefix}.session_size: mean must be positive")
        if u.max_retransmits < 0:
            problems.append(f"{prefix}.max_retransmits: must be >= 0")
        if u.stop_us is not None and u.stop_us < u.start_us:
            problems.append(f"{prefix}.stop_s: must be >= start_s")
    if problems:
        raise InvalidScenario(problems)


class _Reader:
    """Typed getters over one TOML table, collecting diagnostics."""

    def __init__(self, table: dict, path: str, problems: list[str]):
        self.table = dict(table)
        self.path = path
        self.problems = problems

    def _take(self, key: str):
        return self.table.pop(key, None)

    def number(self, key: str, default=None, minimum=None):
        raw = self._take(key)
        if raw is None:
            return default
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            self.problems.append(f"{self.path}.{key}: expected a number")
            return default
        if minimum is not None and raw < minimum:
            self.problems.append(f"{self.path}.{key}: must be >= {minimum}")
            return default
        return raw

    def integer(self, key: str, default=None, minimum=None):
        raw = self._take(key)
        if raw is None:
            return default
        if isinstance(raw, bool) or not isinstance(raw, int):
            self.problems.append(f"{self.path}.{key}: expected an integer")
            return default
        if minimum is not None and raw < minimum:
            self.problems.append(f"{self.path}.{key}: must be >= {minimum}")
            return default
        return raw

    def boolean(self, key: str, default=None):
        raw = self._take(key)
        if raw is None:
            return default
        if not isinstance(raw, bool):
            self.problems.append(f"{self.path}.{key}: expected true/false")
            return default
        return raw

    def text(self, key: str, default=None, choices=None):
        raw = self._take(key)
        if raw is None:
            return default
        if not isinstance(raw, str):
            self.problems.append(f"{self.path}.{key}: expected a string")
            return default
        if choices is not None and raw not in choices:
            self.problems.append(
                f"{self.path}.{key}: expected one of {sorted(choices)}")
            return default
        return raw

    def dist(self, key: str, default: Dist, scale: float = 1.0) -> Dist:
        raw = self._take(key)
        if raw is None:
            return default
        if not isinstance(raw, dict):
            self.problems.append(f"{self.path}.{key}: expected a table")
            return default
        sub = _Reader(raw, f"{self.path}.{key}", self.problems)
        kind = sub.text("kind", choices={"fixed", "exponential", "uniform"})
        if kind is None:
            self.problems.append(f"{self.path}.{key}.kind: required")
            sub.finish()
            return default
        try:
            if kind == "fixed":
                dist = Dist("fixed", sub.number("value", 0, minimum=0) * scale)
            elif kind == "exponential":
                dist = Dist("exponential", sub.number("mean", 0, minimum=0) * scale)
            else:
                low = sub.number("low", 0, minimum=0)
                high = sub.number("high", 0, minimum=0)
                dist = Dist("uniform", low * scale, high * scale)
        except ValueError as exc:
            self.problems.append(f"{self.path}.{key}: {exc}")
            dist = default
        sub.finish()
        return dist

    def subtable(self, key: str) -> dict:
        raw = self._take(key)
        if raw is None:
            return {}
        if not isinstance(raw, dict):
            self.problems.append(f"{self.path}.{key}: expected a table")
            return {}
        return raw

    def finish(self) -> None:
        for key in self.table:
            self.problems.append(f"{self.path}.{key}: unknown key")


def _us(seconds: float) -> int:
    return int(round(seconds * 1_000_000))


def scenario_from_dict(raw: dict) -> Scenario:
    """Build and validate a Scenario from parsed TOML data."""
    problems: list[str] = []
    top = _Reader(raw, "", problems)
    top.path = "top-level"

    version = top.integer("version")
    if version is None:
        problems.append("top-level.version: required")
    elif version != SCHEMA_VERSION:
        problems.append(f"top-level.version: unsupported version {version}")

    sim = _Reader(top.subtable("sim"), "sim", problems)
    horizon_s = sim.number("horizon_s", minimum=0)
    if horizon_s is None:
        problems.append("sim.horizon_s: required")
        horizon_s = 1.0
    seed = sim.integer("seed", default=0, minimum=0)
    sim.finish()

    ctl = _Reader(top.subtable("controller"), "controller", problems)
    controller = ControllerConfig(
        retention_us=_us(ctl.number("retention_s", 10.0, minimum=0)),
        routine_period_us=_us(ctl.number("routine_period_s", 5.0, minimum=0)),
        ack_timeout_us=int(round(ctl.number("ack_timeout_ms", 100.0, minimum=0) * 1000)),
        max_retries=ctl.integer("max_retries", 3, minimum=1),
        sleeping_enabled=ctl.boolean("sleeping_enabled", True),
    )
    ctl.finish()

    pol = _Reader(top.subtable("policy"), "policy", problems)
    try:
        policy = ThresholdPolicy(
            capacity_bps=pol.number("capacity_bps", 16_800.0, minimum=0),
            rho_up=pol.number("rho_up", 0.7),
            rho_down=pol.number("rho_down", 0.3),
        )
    except ValueError as exc:
        problems.append(f"policy: {exc}")
        policy = ThresholdPolicy()
    pol.finish()

    bh = _Reader(top.subtable("backhaul"), "backhaul", problems)
    try:
        backhaul = BackhaulModel(
            overhead_mean_us=bh.number("mean_us", 360.0, minimum=0),
            overhead_std_us=bh.number("std_us", 100.0, minimum=0),
            loss_probability=bh.number("loss_probability", 0.0, minimum=0),
        )
    except ValueError as exc:
        problems.append(f"backhaul: {exc}")
        backhaul = BackhaulModel()
    bh.finish()

    en = _Reader(top.subtable("energy"), "energy", problems)
    depth_text = en.text("sleep_depth", "FULL", choices={"HALF", "FULL"})
    try:
        power = PowerProfile(
            cbs_pc_w=en.number("cbs_pc_w", 129.0, minimum=0),
            tbs_pc_active_w=en.number("tbs_pc_active_w", 108.5, minimum=0),
            tbs_pc_software_off_w=en.number("tbs_pc_software_off_w", 90.5, minimum=0),
            tbs_pc_off_w=en.number("tbs_pc_off_w", 0.0, minimum=0),
            usrp_on_w=en.number("usrp_on_w", 13.8, minimum=0),
            usrp_off_w=en.number("usrp_off_w", 0.0, minimum=0),
            switch_w=en.number("switch_w", 21.0, minimum=0),
            sleep_depth=SleepDepth[depth_text],
        )
    except ValueError as exc:
        problems.append(f"energy: {exc}")
        power = PowerProfile()
    en.finish()

    stations = []
    raw_stations = top._take("tbs")
    if raw_stations is None:
        raw_stations = []
    if not isinstance(raw_stations, list):
        problems.append("tbs: expected an array of tables")
        raw_stations = []
    for index, entry in enumerate(raw_stations):
        if not isinstance(entry, dict):
            problems.append(f"tbs[{index}]: expected a table")
            continue
        r = _Reader(entry, f"tbs[{index}]", problems)
        tbs_id = r.integer("id", minimum=0)
        if tbs_id is None:
            problems.append(f"tbs[{index}].id: required")
            tbs_id = index
        mode_text = r.text("initial_mode", "ACTIVE", choices={"ACTIVE", "SLEEPING"})
        stations.append(TbsSpec(
            tbs_id=tbs_id,
            arfcn_count=r.integer("arfcn_count", 1, minimum=1),
            slots_per_arfcn=r.integer("slots_per_arfcn", 8, minimum=2),
            setup_time_us=_us(r.number("setup_s", 8.4, minimum=0)),
            close_down_time_us=int(round(r.number("close_down_ms", 52.0, minimum=0) * 1000)),
            report_interval_us=_us(r.number("report_interval_s", 1.0, minimum=0)),
            start_us=_us(r.number("start_s", 0.0, minimum=0)),
            initial_mode=TbsMode[mode_text],
        ))
        r.finish()

    ues = []
    raw_ues = top._take("ue")
    if raw_ues is None:
        raw_ues = []
    if not isinstance(raw_ues, list):
        problems.append("ue: expected an array of tables")
        raw_ues = []
    for index, entry in enumerate(raw_ues):
        if not isinstance(entry, dict):
            problems.append(f"ue[{index}]: expected a table")
            continue
        r = _Reader(entry, f"ue[{index}]", problems)
        ue_id = r.integer("id", minimum=0)
        if ue_id is None:
            problems.append(f"ue[{index}].id: required")
            ue_id = index
        stop_s = r.number("stop_s", minimum=0)
        ues.append(UeSpec(
            ue_id=ue_id,
            channel=r.text("channel", "GSM_GPRS:PDTCH"),
            arrival_us=r.dist("arrival", Dist("exponential", 3_000_000.0), scale=1e6),
            session_size_bytes=r.dist("session_size", Dist("fixed", 16_800.0)),
            session_rate_bps=r.number("session_rate_bps", 2_400.0, minimum=0),
            retransmit_interval_us=_us(r.number("retransmit_interval_s", 2.0, minimum=0)),
            max_retransmits=r.integer("max_retransmits", 10, minimum=0),
            start_us=_us(r.number("start_s", 0.0, minimum=0)),
            stop_us=None if stop_s is None else _us(stop_s),
        ))
        r.finish()

    top.finish()
    if problems:
        raise InvalidScenario(problems)

    scenario = Scenario(
        horizon_us=_us(horizon_s),
        seed=seed,
        controller=controller,
        policy=policy,
        backhaul=backhaul,
        power=power,
        stations=tuple(stations),
        ues=tuple(ues),
    )
    validate_scenario(scenario)
    return scenario


def load_scenario(path) -> Scenario:
    """Load and validate a TOML scenario file."""
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except OSError as exc:
        raise InvalidScenario([f"cannot read {path}: {exc}"]) from None
    except tomllib.TOMLDecodeError as exc:
        raise InvalidScenario([f"TOML syntax: {exc}"]) from None
    return scenario_from_dict(raw)


def scenario_to_dict(scenario: Scenario) -> dict:
    """Canonical JSON-safe form of a resolved scenario (microsecond units)."""
    return {
        "version": SCHEMA_VERSION,
        "horizon_us": scenario.horizon_us,
        "seed": scenario.seed,
        "controller": {
            "retention_us": scenario.controller.retention_us,
            "routine_period_us": scenario.controller.routine_period_us,
            "ack_timeout_us": scenario.controller.ack_timeout_us,
            "max_retries": scenario.controller.max_retries,
            "sleeping_enabled": scenario.controller.sleeping_enabled,
        },
        "policy": {
            "capacity_bps": scenario.policy.capacity_bps,
            "rho_up": scenario.policy.rho_up,
            "rho_down": scenario.policy.rho_down,
        },
        "backhaul": {
            "overhead_mean_us": scenario.backhaul.overhead_mean_us,
            "overhead_std_us": scenario.backhaul.overhead_std_us,
            "loss_probability": scenario.backhaul.loss_probability,
        },
        "power": {
            "cbs_pc_w": scenario.power.cbs_pc_w,
            "tbs_pc_active_w": scenario.power.tbs_pc_active_w,
            "tbs_pc_software_off_w": scenario.power.tbs_pc_software_off_w,
            "tbs_pc_off_w": scenario.power.tbs_pc_off_w,
            "usrp_on_w": scenario.power.usrp_on_w,
            "usrp_off_w": scenario.power.usrp_off_w,
            "switch_w": scenario.power.switch_w,
            "sleep_depth": scenario.power.sleep_depth.value,
        },
        "stations": [
            {
                "tbs_id": t.tbs_id,
                "arfcn_count": t.arfcn_count,
                "slots_per_arfcn": t.slots_per_arfcn,
                "setup_time_us": t.setup_time_us,
                "close_down_time_us": t.close_down_time_us,
                "report_interval_us": t.report_interval_us,
                "start_us": t.start_us,
                "initial_mode": t.initial_mode.value,
            }
            for t in scenario.stations
        ],
        "ues": [
            {
                "ue_id": u.ue_id,
                "channel": u.channel,
                "arrival_us": {"kind": u.arrival_us.kind,
                               "a": u.arrival_us.a, "b": u.arrival_us.b},
                "session_size_bytes": {"kind": u.session_size_bytes.kind,
                                       "a": u.session_size_bytes.a,
                                       "b": u.session_size_bytes.b},
                "session_rate_bps": u.session_rate_bps,
                "retransmit_interval_us": u.retransmit_interval_us,
                "max_retransmits": u.max_retransmits,
                "start_us": u.start_us,
                "stop_us": u.stop_us,
            }
            for u in scenario.ues
        ],
    }
