"""
Command Line
============
``validate`` checks a config file, ``run`` builds a scenario world, runs
it and prints the trace digest, ``stats`` summarizes a trace file.

Exit codes: 0 clean, 1 validation or parse failure, 2 protocol
nonconformance, 3 runtime error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.config import get_settings
from src.errors import ConfigError, ModelError, SimulationError
from src.loader import default_config, load_scenario, parse_override, parse_scenario, read_json
from src.models import SystemModel, diagnose_system
from src.scenarios import BUILDERS, build_world
from src.scheduler import run
from src.stats import format_summary, summarize
from src.trace import Trace
from src.utils.logging_config import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NONCONFORMANT = 2
EXIT_RUNTIME = 3


def _error(text: str) -> None:
    print(f"error: {text}", file=sys.stderr)


def _config_path(args) -> Optional[Path]:
    if args.config:
        return Path(args.config)
    if args.scenario:
        return default_config(args.scenario)
    return None


# -------------------------------------------------------------------------
# validate
# -------------------------------------------------------------------------
def _system_diagnostics(params) -> List[str]:
    model = SystemModel(
        agents={spec.id: spec for spec in params.agents},
        interactions=params.interactions,
        roles=params.roles,
        organizations=params.communities,
        affinity=params.affinity,
    )
    return [str(d) for d in diagnose_system(model)]


def cmd_validate(args) -> int:
    path = _config_path(args)
    if path is None:
        _error("validate needs a config path or --scenario")
        return EXIT_INVALID
    try:
        name, params = parse_scenario(read_json(path), args.scenario)
        if name == "system":
            diagnostics = _system_diagnostics(params)
        else:
            build_world(name, params)
            diagnostics = []
    except FileNotFoundError as e:
        _error(str(e))
        return EXIT_INVALID
    except ConfigError as e:
        print(str(e))
        for line in getattr(e, "details", [])[1:]:
            print(line)
        return EXIT_INVALID
    except ModelError as e:
        print(f"{type(e).__name__}: {e}")
        return EXIT_INVALID
    for line in diagnostics:
        print(line)
    if diagnostics:
        return EXIT_INVALID
    print(f"{path}: ok ({name})")
    return EXIT_OK


# -------------------------------------------------------------------------
# run
# -------------------------------------------------------------------------
def cmd_run(args) -> int:
    path = _config_path(args)
    if path is None:
        _error("run needs --scenario or --config")
        return EXIT_INVALID
    overrides = {}
    try:
        for text in args.set or []:
            key, value = parse_override(text)
            overrides[key] = value
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.steps is not None:
            overrides["steps"] = args.steps
        name, params = load_scenario(path, args.scenario, overrides)
        if args.mute:
            params = params.model_copy(update={"mute": [*params.mute, *args.mute]})
        world = build_world(name, params, parallel=args.parallel)
    except FileNotFoundError as e:
        _error(str(e))
        return EXIT_INVALID
    except (ConfigError, ModelError) as e:
        _error(f"{type(e).__name__}: {e}")
        for line in getattr(e, "details", [])[1:]:
            print(line, file=sys.stderr)
        return EXIT_INVALID

    try:
        trace = run(world, params.steps)
    except SimulationError as e:
        _error(f"{type(e).__name__}: {e}")
        return EXIT_RUNTIME

    if args.out:
        trace.write(args.out)
    if args.weights_report:
        Path(args.weights_report).write_text(
            json.dumps(world.affinity.model_dump(mode="json"), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    print(trace.digest())

    if args.conformance:
        flagged = trace.flagged()
        # overdue ones are already among the flagged events
        pending = [ob for ob in world.tracker.open() if not ob.reported_overdue]
        for event in flagged:
            print(f"round {event.round} {event.event} {event.conversation or '-'}: {event.detail}")
        for ob in pending:
            print(f"pending {ob.act.performative.value} {ob.act.sender}->{ob.act.receiver} in {ob.act.conversation}")
        if flagged or pending:
            return EXIT_NONCONFORMANT
    return EXIT_OK


# -------------------------------------------------------------------------
# stats
# -------------------------------------------------------------------------
def cmd_stats(args) -> int:
    path = args.trace or args.trace_path
    if path is None:
        _error("stats needs a trace path")
        return EXIT_INVALID
    try:
        summary = summarize(Trace.load(path))
    except FileNotFoundError as e:
        _error(str(e))
        return EXIT_INVALID
    except ConfigError as e:
        _error(str(e))
        return EXIT_INVALID
    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        print(format_summary(summary))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agentsim", description="Multi-level agent simulation runner")
    parser.add_argument("--log-level", default=None, help="Overrides LOG_LEVEL")
    parser.add_argument("--log-json", action="store_true", default=None, help="JSON log records on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", help="Check a config file")
    validate.add_argument("config", nargs="?", default=None)
    validate.add_argument("--scenario", choices=sorted(BUILDERS))
    validate.set_defaults(handler=cmd_validate)

    run_cmd = commands.add_parser("run", help="Run a scenario and print the trace digest")
    run_cmd.add_argument("--scenario", choices=sorted(BUILDERS))
    run_cmd.add_argument("--config", default=None, help="Config file (defaults to CONFIG_DIR/<scenario>.json)")
    run_cmd.add_argument("--seed", type=int, default=None)
    run_cmd.add_argument("--steps", type=int, default=None)
    run_cmd.add_argument("--out", default=None, help="Trace output path (JSON lines)")
    run_cmd.add_argument("--conformance", action="store_true", help="Exit 2 on protocol nonconformance")
    run_cmd.add_argument("--weights-report", default=None, help="Write final affinity weights as JSON")
    run_cmd.add_argument("--set", action="append", metavar="KEY=JSON", help="Override a config parameter")
    run_cmd.add_argument("--mute", action="append", metavar="AGENT", help="Remove an agent's rules")
    run_cmd.add_argument("--parallel", action="store_true", help="Step agents on worker threads")
    run_cmd.set_defaults(handler=cmd_run)

    stats = commands.add_parser("stats", help="Summarize a trace file")
    stats.add_argument("trace_path", nargs="?", default=None)
    stats.add_argument("--trace", default=None)
    stats.add_argument("--json", action="store_true")
    stats.set_defaults(handler=cmd_stats)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, args.log_json)
    if getattr(args, "steps", None) is not None and args.steps < 0:
        _error("--steps must be nonnegative")
        return EXIT_INVALID
    settings = get_settings()
    logger.debug(f"[CLI] {args.command} with CONFIG_DIR={settings.CONFIG_DIR}")
    return args.handler(args)
