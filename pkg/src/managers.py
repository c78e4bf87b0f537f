"""
Agent Resource Managers
=======================
The message manager (mailboxes), the action manager (action log) and the
knowledge-base manager. Every act delivery, logged effect and knowledge
write of a run goes through one of these.
"""

import logging
from collections import deque
from typing import Any, Deque, Dict, List, Literal, Tuple

from src.errors import MissingKnowledgeKey, NonMonotoneRound
from src.schemas.acts import CommunicationAct
from src.schemas.agents import AgentSpec

logger = logging.getLogger(__name__)

Partition = Literal["facts", "system_model"]


class KnowledgeManager:
    """Mutable knowledge of one agent with a journal of every write."""

    def __init__(self, agent_id: str, facts: Dict[str, Any] = None, system_model: Dict[str, Any] = None):
        self.agent_id = agent_id
        self.facts: Dict[str, Any] = dict(facts or {})
        self.system_model: Dict[str, Any] = dict(system_model or {})
        self.journal: List[Tuple[Partition, str, Any]] = []

    @classmethod
    def from_spec(cls, spec: AgentSpec) -> "KnowledgeManager":
        return cls(spec.id, spec.kb.facts, spec.kb.system_model)

    def has(self, key: str) -> bool:
        return key in self.facts or key in self.system_model

    def lookup(self, key: str) -> Any:
        if key in self.facts:
            return self.facts[key]
        if key in self.system_model:
            return self.system_model[key]
        raise MissingKnowledgeKey(f"{self.agent_id} has no knowledge key {key!r}")

    def write(self, key: str, value: Any, partition: Partition = "facts") -> None:
        # a key keeps the partition it already lives in
        if partition == "facts" and key in self.system_model:
            partition = "system_model"
        elif partition == "system_model" and key in self.facts:
            partition = "facts"
        target = self.facts if partition == "facts" else self.system_model
        target[key] = value
        self.journal.append((partition, key, value))

    def drain(self) -> List[Tuple[Partition, str, Any]]:
        writes, self.journal = self.journal, []
        return writes


class ActionLog:
    """Ordered (round, effect) entries of one agent."""

    def __init__(self, agent_id: str = ""):
        self.agent_id = agent_id
        self.entries: List[Tuple[int, Any]] = []

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def last_round(self) -> int:
        return self.entries[-1][0] if self.entries else -1


def record_action(log: ActionLog, round: int, effect) -> ActionLog:
    if round < log.last_round:
        raise NonMonotoneRound(f"{log.agent_id}: round {round} after {log.last_round}")
    log.entries.append((round, effect))
    return log


class MessageManager:
    """Mailboxes and the outbox of acts waiting for next-round delivery."""

    def __init__(self):
        self.mailboxes: Dict[str, Deque[CommunicationAct]] = {}
        self.outbox: List[CommunicationAct] = []
        self.sent = 0
        self.delivered = 0

    def post(self, act: CommunicationAct) -> None:
        self.outbox.append(act)
        self.sent += 1

    def collect(self) -> List[CommunicationAct]:
        """Acts to deliver this round: ascending sender, then send order."""
        pending, self.outbox = self.outbox, []
        return sorted(pending, key=lambda act: act.sender)

    def deliver(self, act: CommunicationAct) -> None:
        self.mailboxes.setdefault(act.receiver, deque()).append(act)
        self.delivered += 1

    def record_micro(self) -> None:
        """Micro acts are delivered inside their actor in the round they are sent."""
        self.sent += 1
        self.delivered += 1

    def drain(self, agent_id: str) -> List[CommunicationAct]:
        box = self.mailboxes.get(agent_id)
        if not box:
            return []
        acts = list(box)
        box.clear()
        return acts

    @property
    def in_flight(self) -> int:
        return len(self.outbox)
