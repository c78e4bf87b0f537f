"""
Environment
===========
Per-agent environment state, the percept queues agents observe from, the
scheduled changes a scenario seeds and the handlers environment actions
dispatch to.
"""

import logging
from collections import defaultdict
from typing import Any, Callable, Dict, Iterable, List, Optional

from src.errors import RuleError
from src.rng import SeededStreams
from src.schemas.effects import EnvironmentEffect, Percept
from src.schemas.scenario import ScheduledChange
from src.schemas.trace import EnvChange

logger = logging.getLogger(__name__)

GLOBAL = "*"

OpHandler = Callable[["Environment", int, str, Dict[str, Any]], List[EnvChange]]
RoundHook = Callable[["Environment", int], List[EnvChange]]


class Environment:
    """Environment keys per agent. Changing another agent's key queues a
    percept for it; the agent observes it in its next step."""

    def __init__(
        self,
        state: Optional[Dict[str, Dict[str, Any]]] = None,
        scheduled: Iterable[ScheduledChange] = (),
        streams: Optional[SeededStreams] = None,
    ):
        self.state: Dict[str, Dict[str, Any]] = defaultdict(dict)
        for agent, keys in (state or {}).items():
            self.state[agent].update(keys)
        self.scheduled: Dict[int, List[ScheduledChange]] = defaultdict(list)
        for change in sorted(scheduled, key=lambda c: (c.round, c.agent, c.key)):
            self.scheduled[change.round].append(change)
        self.streams = streams or SeededStreams(0)
        self.queues: Dict[str, List[Percept]] = defaultdict(list)
        self.handlers: Dict[str, OpHandler] = {"set": _op_set, "post": _op_post}
        self.hooks: List[RoundHook] = []
        # scenario objects the handlers close over
        self.context: Dict[str, Any] = {}

    def register(self, op: str, handler: OpHandler) -> None:
        self.handlers[op] = handler

    def get(self, agent: str, key: str, default: Any = None) -> Any:
        return self.state.get(agent, {}).get(key, default)

    def notify(self, agent: str, percept: Percept) -> None:
        self.queues[agent].append(percept)

    def set(
        self, round: int, agent: str, key: str, value: Any, source: Optional[str] = None, perceive: bool = True
    ) -> EnvChange:
        self.state[agent][key] = value
        if perceive and agent != GLOBAL:
            self.notify(agent, Percept(key=key, value=value, source=source))
        return EnvChange(round=round, agent=agent, key=key, value=value, source=source)

    def begin_round(self, round: int) -> List[EnvChange]:
        """Apply the changes scheduled for ``round`` and run the round hooks."""
        changes = [self.set(round, c.agent, c.key, c.value) for c in self.scheduled.pop(round, [])]
        for hook in self.hooks:
            changes.extend(hook(self, round))
        return changes

    def percepts_for(self, agent: str) -> List[Percept]:
        return self.queues.pop(agent, [])

    def apply(self, round: int, agent: str, effect: EnvironmentEffect) -> List[EnvChange]:
        handler = self.handlers.get(effect.op)
        if handler is None:
            raise RuleError(f"{agent} requested unknown environment operation {effect.op!r}")
        return handler(self, round, agent, dict(effect.params))


def _op_set(env: Environment, round: int, agent: str, params: Dict[str, Any]) -> List[EnvChange]:
    """Write a key of the acting agent's own environment."""
    return [env.set(round, agent, str(params["key"]), params.get("value"), source=agent, perceive=False)]


def _op_post(env: Environment, round: int, agent: str, params: Dict[str, Any]) -> List[EnvChange]:
    """Change a key of ``target``'s environment; ``target`` perceives it."""
    target = str(params["target"])
    return [env.set(round, target, str(params["key"]), params.get("value"), source=agent)]
