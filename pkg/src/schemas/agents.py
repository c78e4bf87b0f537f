"""
Agent schemas: knowledge base, roles and per-level agent definitions.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.schemas.rules import DecisionRule, InterpretationRule, ReflexEntry


class CooperationRole(str, Enum):
    """Member roles of a collective actor."""

    OBSERVER = "observer"
    KNOWLEDGE = "knowledge"
    CONTROL = "control"
    MONITORING = "monitoring"
    MEMORIZATION = "memorization"
    COMMUNICATION = "communication"


class KnowledgeBase(BaseModel):
    """The four kinds of agent knowledge.

    ``facts`` holds domain values and internal state, ``system_model`` the
    agent's beliefs about the rest of the system, ``rules`` its decision
    rules and ``acquaintances``/``interaction_config`` its interaction
    knowledge.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    facts: Dict[str, Any] = Field(default_factory=dict)
    system_model: Dict[str, Any] = Field(default_factory=dict)
    rules: List[DecisionRule] = Field(default_factory=list)
    acquaintances: List[str] = Field(default_factory=list)
    interaction_config: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self):
        shared = set(self.facts) & set(self.system_model)
        if shared:
            raise ValueError(f"keys in both facts and system_model: {sorted(shared)}")
        ids = [rule.id for rule in self.rules]
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate rule ids: {sorted({i for i in ids if ids.count(i) > 1})}")
        return self


class Role(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(min_length=1)
    level: int = Field(ge=1, le=4)


class AgentSpec(BaseModel):
    """An agent's level, its observation/interpretation/decision/action
    configuration and its knowledge base.

    Level 1 reacts through ``reflex_map``, level 2 decides with
    ``kb.rules``, level 3 adds ``interpreter``, level 4 routes through the
    agents named in ``members``. A member agent names its actor in
    ``actor`` and is stepped only by that actor.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(min_length=1)
    level: int = Field(ge=1, le=4)
    kb: KnowledgeBase = Field(default_factory=KnowledgeBase)
    reflex_map: List[ReflexEntry] = Field(default_factory=list)
    interpreter: List[InterpretationRule] = Field(default_factory=list)
    members: Dict[CooperationRole, str] = Field(default_factory=dict)
    actor: Optional[str] = None

    def missing_members(self) -> List[str]:
        return [role.value for role in CooperationRole if role not in self.members]
