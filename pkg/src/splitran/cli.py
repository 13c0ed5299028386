"""Scenario runner CLI: run, replay, validate.

Exit codes: 0 success, 1 scenario/input error, 2 invariant violation
found during replay.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .metrics import fold_records, read_event_log, verify_records, write_outputs
from .scenario import InvalidScenario, load_scenario
from .sim import Simulation


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except InvalidScenario as exc:
        for line in exc.diagnostics:
            print(f"scenario error: {line}", file=sys.stderr)
        return 1
    seed = args.seed if args.seed is not None else scenario.seed
    try:
        sim = Simulation(scenario, seed)
    except InvalidScenario as exc:
        for line in exc.diagnostics:
            print(f"scenario error: {line}", file=sys.stderr)
        return 1
    bundle = sim.run()
    outdir = Path(args.out)
    write_outputs(outdir, bundle, sim.records)
    print(f"wrote {outdir} (seed {seed}, horizon {bundle.horizon_us} us, "
          f"{len(sim.records)} records)")
    return 0


def _cmd_replay(args) -> int:
    try:
        records = read_event_log(Path(args.log))
        fold_records(records)  # must parse back into a bundle
    except (OSError, ValueError, KeyError) as exc:
        print(f"replay error: {exc}", file=sys.stderr)
        return 1
    violations = verify_records(records)
    if violations:
        for line in violations:
            print(f"violation: {line}", file=sys.stderr)
        print(f"replay: {len(violations)} invariant violation(s)", file=sys.stderr)
        return 2
    print(f"replay: {len(records)} records, all invariants hold")
    return 0


def _cmd_validate(args) -> int:
    try:
        load_scenario(args.scenario)
    except InvalidScenario as exc:
        for line in exc.diagnostics:
            print(f"scenario error: {line}", file=sys.stderr)
        return 1
    print(f"{args.scenario}: valid")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitran",
        description="Discrete-event simulator for a control/traffic split RAN "
                    "with station dispatching and sleeping control.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write its outputs")
    run_p.add_argument("--scenario", required=True, help="scenario TOML file")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the scenario's seed")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.set_defaults(func=_cmd_run)

    replay_p = sub.add_parser("replay",
                              help="re-verify invariants over a stored event log")
    replay_p.add_argument("--log", required=True, help="events.log file")
    replay_p.set_defaults(func=_cmd_replay)

    val_p = sub.add_parser("validate", help="schema-check a scenario file")
    val_p.add_argument("--scenario", required=True, help="scenario TOML file")
    val_p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
