"""splitran: a deterministic simulator and protocol library for a RAN
whose control and traffic coverages are split across two station types.

Control base stations (CBS) hold the network view, serve low-rate
traffic, dispatch the least-loaded traffic base station (TBS) for
high-rate requests, and put idle TBSs to sleep for energy efficiency.
"""

from .channels import (InvalidChannel, LogicalChannel, RequestClass,
                       SEPARATION_MAP, ServingSide, Standard,
                       classify_channel, classify_request)
from .controller import (BelievedMode, CbsController, ControllerConfig,
                         DecisionKind, DispatchDecision, DispatchResult,
                         PolicySnapshot, RejectReason, SleepPolicy,
                         ThresholdPolicy, UnknownTbs, threshold_target_count)
from .energy import (EnergyLedger, PowerProfile, SleepDepth, TimelineGap,
                     ZeroBaseline, component_powers, savings, station_power)
from .metrics import (CdfRecord, EmptySamples, MetricsBundle, export_cdf,
                      fold_records, read_event_log, transition_durations,
                      verify_records, write_event_log, write_outputs)
from .scenario import (BackhaulModel, Dist, InvalidScenario, Scenario,
                       TbsSpec, UeSpec, load_scenario, scenario_to_dict,
                       validate_scenario)
from .sim import (EventQueue, PastEvent, Simulation, component_rng, run,
                  sample_backhaul_delay)
from .station import (CLOSE_DOWN_TIME_US, SETUP_TIME_US, NotActive, TbsAgent,
                      TbsConfig, TbsMode, UnknownSession)
from . import wire

__version__ = "0.1.0"

__all__ = [
    "BackhaulModel", "BelievedMode", "CbsController", "CdfRecord",
    "CLOSE_DOWN_TIME_US", "ControllerConfig", "DecisionKind", "Dist",
    "DispatchDecision", "DispatchResult", "EmptySamples", "EnergyLedger",
    "EventQueue", "InvalidChannel", "InvalidScenario", "LogicalChannel",
    "MetricsBundle", "NotActive", "PastEvent", "PolicySnapshot",
    "PowerProfile", "RejectReason", "RequestClass", "Scenario",
    "SEPARATION_MAP", "SETUP_TIME_US", "ServingSide", "Simulation",
    "SleepDepth", "SleepPolicy", "Standard", "TbsAgent", "TbsConfig",
    "TbsMode", "TbsSpec", "ThresholdPolicy", "TimelineGap", "UeSpec",
    "UnknownSession", "UnknownTbs", "ZeroBaseline", "classify_channel",
    "classify_request", "component_powers", "component_rng", "export_cdf",
    "fold_records", "load_scenario", "read_event_log", "run",
    "sample_backhaul_delay", "savings", "scenario_to_dict", "station_power",
    "threshold_target_count", "transition_durations", "validate_scenario",
    "verify_records", "wire", "write_event_log", "write_outputs",
]
