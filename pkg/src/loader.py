"""
Config Loading
==============
Reads scenario config files, applies settings defaults and ``--set``
overrides, and converts parse and validation failures into ParseError and
InvalidConfig.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import TypeAdapter, ValidationError

from src.config import Settings, get_settings
from src.errors import InvalidConfig, ParseError
from src.models import SystemModel, build_system
from src.schemas.scenario import ScenarioFile, ScenarioParams, SystemConfig

logger = logging.getLogger(__name__)

_SCENARIO_FILE = TypeAdapter(ScenarioFile)

AFFINITY_SCENARIOS = ("configuration", "system")


def validation_details(error: ValidationError) -> List[str]:
    return [f"{'.'.join(str(p) for p in e['loc']) or '<root>'}: {e['msg']}" for e in error.errors()]


def read_json(path: Union[str, Path]) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno, column=e.colno, path=str(path)) from e


def parse_override(text: str) -> Tuple[str, Any]:
    """``key=json`` into (dotted key, value). A value that is not JSON is a string."""
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise InvalidConfig(f"override {text!r} is not key=value")
    try:
        return key.strip(), json.loads(raw)
    except json.JSONDecodeError:
        return key.strip(), raw


def apply_override(params: Dict[str, Any], key: str, value: Any) -> None:
    *path, last = key.split(".")
    node = params
    for part in path:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise InvalidConfig(f"override {key}: {part} is not an object")
    node[last] = value


def apply_settings(scenario: str, params: Dict[str, Any], settings: Settings) -> None:
    """Fill what the file leaves unset from the environment settings."""
    params.setdefault("seed", settings.SIM_SEED)
    params.setdefault("steps", settings.SIM_STEPS)
    params.setdefault("protocol", {}).setdefault("timeout_rounds", settings.OBLIGATION_TIMEOUT_ROUNDS)
    if scenario in AFFINITY_SCENARIOS:
        affinity = params.setdefault("affinity", {})
        affinity.setdefault("inhibition_threshold", settings.INHIBITION_THRESHOLD)
        affinity.setdefault("reinforce_delta", settings.REINFORCE_DELTA)
        affinity.setdefault("decay_delta", settings.DECAY_DELTA)


def parse_scenario(
    data: Any,
    scenario: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    settings: Optional[Settings] = None,
) -> Tuple[str, ScenarioParams]:
    if not isinstance(data, dict):
        raise InvalidConfig("a config file holds one JSON object")
    name = data.get("scenario") or scenario
    if name is None:
        raise InvalidConfig("no scenario named in the file or on the command line")
    if scenario is not None and name != scenario:
        raise InvalidConfig(f"file describes scenario {name!r}, not {scenario!r}")
    params = data.get("parameters", {})
    if not isinstance(params, dict):
        raise InvalidConfig("parameters must be an object")
    params = json.loads(json.dumps(params))
    for key, value in (overrides or {}).items():
        apply_override(params, key, value)
    apply_settings(name, params, settings or get_settings())
    extra = sorted(set(data) - {"scenario", "parameters"})
    if extra:
        raise InvalidConfig(f"unknown top-level keys: {extra}")
    try:
        parsed = _SCENARIO_FILE.validate_python({"scenario": name, "parameters": params})
    except ValidationError as e:
        details = validation_details(e)
        raise InvalidConfig(f"invalid {name} config: {details[0]}", details=details) from e
    return name, parsed.parameters


def load_scenario(
    path: Union[str, Path],
    scenario: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    settings: Optional[Settings] = None,
) -> Tuple[str, ScenarioParams]:
    name, params = parse_scenario(read_json(path), scenario, overrides, settings)
    logger.info(f"[Loader] Loaded {name} config from {path}")
    return name, params


def default_config(scenario: str, settings: Optional[Settings] = None) -> Path:
    return Path((settings or get_settings()).CONFIG_DIR) / f"{scenario}.json"


# -------------------------------------------------------------------------
# System round trip
# -------------------------------------------------------------------------
def dump_system(system: SystemModel) -> Dict[str, Any]:
    """A ``system`` scenario file describing ``system``."""
    config = SystemConfig(
        agents=[system.agents[aid] for aid in sorted(system.agents)],
        roles=system.roles,
        communities=system.organizations,
        interactions=system.interactions,
        affinity=system.affinity,
    )
    return {"scenario": "system", "parameters": config.model_dump(mode="json")}


def load_system(data: Dict[str, Any]) -> SystemModel:
    _, params = parse_scenario(data, "system")
    return build_system(
        params.agents,
        interactions=params.interactions,
        roles=params.roles,
        organizations=params.communities,
        affinity=params.affinity,
    )
