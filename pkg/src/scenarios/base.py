"""Helpers shared by the scenario builders."""

from typing import Iterable, List

from src.environment import Environment
from src.models import SystemModel
from src.rng import SeededStreams
from src.scheduler import World, create_world
from src.schemas.agents import AgentSpec
from src.schemas.scenario import ScenarioParams, ScheduledChange


def silence(spec: AgentSpec) -> AgentSpec:
    """The same agent with every rule and reflex removed: it never responds."""
    kb = spec.kb.model_copy(update={"rules": []})
    return spec.model_copy(update={"kb": kb, "reflex_map": [], "interpreter": []})


def apply_mute(agents: Iterable[AgentSpec], mute: Iterable[str]) -> List[AgentSpec]:
    muted = set(mute)
    return [silence(spec) if spec.id in muted else spec for spec in agents]


def assemble(
    system: SystemModel,
    params: ScenarioParams,
    scheduled: Iterable[ScheduledChange] = (),
    parallel: bool = False,
) -> World:
    environment = Environment(scheduled=scheduled, streams=SeededStreams(params.seed))
    return create_world(system, environment, protocol=params.protocol, parallel=parallel)
