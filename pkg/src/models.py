"""
System Model
============
The agent-based system as a validated tuple of agents, allowed
interactions, roles, organizations and the affinity network, plus rule
validation and communication act construction.
"""

import logging
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from src.errors import (
    DuplicateCommunity,
    IncompleteMembers,
    InvalidConfig,
    MissingRole,
    SelfMessage,
    UnknownAgent,
    UnknownCommunity,
)
from src.schemas.acts import CommunicationAct, MessageType, Performative
from src.schemas.agents import AgentSpec, Role
from src.schemas.expressions import (
    MAX_CONDITION_DEPTH,
    condition_depth,
    condition_variables,
    expr_variables,
    template_fields,
)
from src.schemas.organization import AffinityNetwork, Community, Interaction
from src.schemas.rules import (
    DecisionRule,
    Diffuse,
    EnvironmentOp,
    EventPattern,
    InterpretationRule,
    ReflexEntry,
    Send,
    TaskOf,
    UpdateKnowledge,
)

logger = logging.getLogger(__name__)


class Diagnostic(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.code}({self.subject})"
        return f"{text}: {self.detail}" if self.detail else text


class SystemModel(BaseModel):
    """Agents, allowed interactions, roles, communities and affinities."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    agents: Dict[str, AgentSpec] = Field(default_factory=dict)
    interactions: List[Interaction] = Field(default_factory=list)
    roles: Dict[str, Role] = Field(default_factory=dict)
    organizations: List[Community] = Field(default_factory=list)
    affinity: AffinityNetwork = Field(default_factory=AffinityNetwork)

    def community(self, name: str) -> Optional[Community]:
        for community in self.organizations:
            if community.name == name:
                return community
        return None

    def top_level_agents(self) -> List[str]:
        """Agents the scheduler steps itself, ascending. Members of a
        collective actor are stepped by their actor."""
        return sorted(aid for aid, spec in self.agents.items() if spec.actor is None)

    def allows(self, sender: str, receiver: str, performative: Performative) -> bool:
        """Whether the interaction set admits this act. An empty set admits all."""
        if not self.interactions:
            return True
        s_role, r_role = self.roles.get(sender), self.roles.get(receiver)
        if s_role is None or r_role is None:
            return False
        return any(
            i.sender_role == s_role.name and i.receiver_role == r_role.name and i.performative == performative
            for i in self.interactions
        )


# -------------------------------------------------------------------------
# Rule validation
# -------------------------------------------------------------------------
def _payload_variables(payload) -> Iterator[str]:
    if isinstance(payload, TaskOf):
        return
    key = getattr(payload, "key", None)
    if key is not None:
        yield from template_fields(key)
    value = getattr(payload, "value", None)
    if value is not None:
        yield from expr_variables(value)


def action_variables(action) -> Iterator[str]:
    if isinstance(action, Send):
        yield from template_fields(action.receiver)
        yield from _payload_variables(action.payload)
    elif isinstance(action, Diffuse):
        yield from _payload_variables(action.payload)
    elif isinstance(action, UpdateKnowledge):
        yield from template_fields(action.key)
        yield from expr_variables(action.value)
    elif isinstance(action, EnvironmentOp):
        for expr in action.params.values():
            yield from expr_variables(expr)


def pattern_bindings(pattern: EventPattern, member: bool = False) -> set:
    bound = {"sender", "payload_key"}
    if pattern.source == "message":
        bound.add("conversation")
    if pattern.payload_binder:
        bound.add(pattern.payload_binder)
    if member:
        bound.add("origin")
    return bound


def _check_actions(actions, pattern: EventPattern, bound: set, context: "SystemModel", subject: str) -> List[Diagnostic]:
    found: List[Diagnostic] = []
    for action in actions:
        for name in action_variables(action):
            if name not in bound:
                found.append(Diagnostic(code="UnboundVariable", subject=name, detail=f"in {subject}"))
        if isinstance(action, Diffuse) and context.community(action.community) is None:
            found.append(Diagnostic(code="UnknownCommunity", subject=action.community, detail=f"in {subject}"))
        if isinstance(action, Send):
            if not template_fields(action.receiver) and action.receiver not in context.agents:
                found.append(Diagnostic(code="UnknownAgent", subject=action.receiver, detail=f"in {subject}"))
            if action.reply and pattern.source != "message":
                found.append(Diagnostic(code="ReplyWithoutConversation", subject=subject))
    return found


def _check_condition(condition, bound: set, subject: str) -> List[Diagnostic]:
    found = [
        Diagnostic(code="UnboundVariable", subject=name, detail=f"in {subject}")
        for name in condition_variables(condition)
        if name not in bound
    ]
    if condition_depth(condition) > MAX_CONDITION_DEPTH:
        found.append(Diagnostic(code="ConditionTooDeep", subject=subject, detail=f"limit {MAX_CONDITION_DEPTH}"))
    return found


def validate_rule(rule: DecisionRule, context: SystemModel, owner: str) -> List[Diagnostic]:
    """Check that every variable of the rule is bound and every name resolves.

    Returns an empty list when the rule is valid.
    """
    spec = context.agents.get(owner)
    bound = pattern_bindings(rule.event, member=spec is not None and spec.actor is not None)
    subject = f"{owner}/{rule.id}"
    found = _check_condition(rule.condition, bound, subject)
    found.extend(_check_actions(rule.actions, rule.event, bound, context, subject))
    if rule.event.sender is not None and rule.event.sender not in context.agents:
        found.append(Diagnostic(code="UnknownAgent", subject=rule.event.sender, detail=f"in {subject}"))
    return found


def _validate_reflex(entry: ReflexEntry, context: SystemModel, owner: str, index: int) -> List[Diagnostic]:
    bound = pattern_bindings(entry.pattern)
    return _check_actions(entry.actions, entry.pattern, bound, context, f"{owner}/reflex-{index}")


def _validate_interpretation(rule: InterpretationRule, owner: str) -> List[Diagnostic]:
    bound = pattern_bindings(rule.trigger)
    subject = f"{owner}/{rule.tag}"
    found = _check_condition(rule.condition, bound, subject)
    for update in rule.update:
        names = list(template_fields(update.key))
        if update.value is not None:
            names.extend(expr_variables(update.value))
        found.extend(
            Diagnostic(code="UnboundVariable", subject=name, detail=f"in {subject}") for name in names if name not in bound
        )
    return found


# -------------------------------------------------------------------------
# System construction
# -------------------------------------------------------------------------
def _agent_map(agents: Union[Mapping[str, AgentSpec], Iterable[AgentSpec]]) -> Dict[str, AgentSpec]:
    if isinstance(agents, Mapping):
        return {spec.id: spec for spec in agents.values()}
    mapping: Dict[str, AgentSpec] = {}
    for spec in agents:
        if spec.id in mapping:
            raise InvalidConfig(f"duplicate agent id {spec.id}")
        mapping[spec.id] = spec
    return mapping


def diagnose_system(model: SystemModel) -> List[Diagnostic]:
    """Every invariant violation of an assembled model, in a stable order."""
    found: List[Diagnostic] = []
    for aid in sorted(model.agents):
        spec = model.agents[aid]
        if aid not in model.roles:
            found.append(Diagnostic(code="MissingRole", subject=aid))
        if spec.actor is not None and spec.actor not in model.agents:
            found.append(Diagnostic(code="UnknownAgent", subject=spec.actor, detail=f"actor of {aid}"))
        if spec.level == 4:
            missing = spec.missing_members()
            if missing:
                found.append(Diagnostic(code="IncompleteMembers", subject=aid, detail=", ".join(missing)))
            for member in spec.members.values():
                if member not in model.agents:
                    found.append(Diagnostic(code="UnknownAgent", subject=member, detail=f"member of {aid}"))
    for aid in sorted(model.roles):
        if aid not in model.agents:
            found.append(Diagnostic(code="UnknownAgent", subject=aid, detail="has a role"))
    seen = set()
    for community in model.organizations:
        if community.name in seen:
            found.append(Diagnostic(code="DuplicateCommunity", subject=community.name))
        seen.add(community.name)
        for member in community.members:
            if member not in model.agents:
                found.append(Diagnostic(code="UnknownAgent", subject=member, detail=f"member of community {community.name}"))
    for aid in sorted(model.agents):
        spec = model.agents[aid]
        for rule in spec.kb.rules:
            found.extend(validate_rule(rule, model, aid))
        for index, entry in enumerate(spec.reflex_map):
            found.extend(_validate_reflex(entry, model, aid, index))
        for rule in spec.interpreter:
            found.extend(_validate_interpretation(rule, aid))
    return found


_ERRORS = {
    "UnknownAgent": UnknownAgent,
    "MissingRole": MissingRole,
    "DuplicateCommunity": DuplicateCommunity,
    "UnknownCommunity": UnknownCommunity,
    "IncompleteMembers": IncompleteMembers,
}


def build_system(
    agents: Union[Mapping[str, AgentSpec], Iterable[AgentSpec]] = (),
    interactions: Iterable[Interaction] = (),
    roles: Optional[Mapping[str, Role]] = None,
    organizations: Iterable[Community] = (),
    affinity: Optional[AffinityNetwork] = None,
) -> SystemModel:
    """Assemble and validate a system model.

    Raises the error named by the first diagnostic (UnknownAgent,
    MissingRole, DuplicateCommunity, UnknownCommunity, IncompleteMembers),
    or InvalidConfig for rule-level problems.
    """
    model = SystemModel(
        agents=_agent_map(agents),
        interactions=list(interactions),
        roles=dict(roles or {}),
        organizations=list(organizations),
        affinity=affinity or AffinityNetwork(),
    )
    found = diagnose_system(model)
    if found:
        first = found[0]
        logger.debug(f"[Model] Rejected system: {[str(d) for d in found]}")
        error = _ERRORS.get(first.code)
        if error is not None:
            raise error(str(first))
        raise InvalidConfig(str(first), details=[str(d) for d in found])
    logger.debug(f"[Model] Built system with {len(model.agents)} agents and {len(model.organizations)} communities")
    return model


def make_act(
    performative: Union[Performative, str],
    sender: str,
    receiver: str,
    mtype: Union[MessageType, int],
    payload,
    conversation: str,
) -> CommunicationAct:
    """Build a communication act. The runtime stamps the round at send time."""
    if sender == receiver:
        raise SelfMessage(f"{sender} cannot address itself")
    if isinstance(performative, str) and not isinstance(performative, Performative):
        performative = Performative.parse(performative)
    if isinstance(mtype, int):
        mtype = MessageType(code=mtype)
    return CommunicationAct(
        performative=performative,
        sender=sender,
        receiver=receiver,
        mtype=mtype,
        payload=payload,
        conversation=conversation,
    )
