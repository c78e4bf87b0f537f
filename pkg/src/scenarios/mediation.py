"""
Mediation Scenario
==================
Designer proxies submit proposals to a collective mediator. The mediator's
members observe, interpret, decide and communicate: control accepts a
proposal at or above the acceptance level and rejects it otherwise, and
the communication member answers the proposing designer.
"""

import logging
from typing import Dict, List

from src.models import build_system
from src.scenarios.base import apply_mute, assemble
from src.scheduler import World
from src.schemas.acts import Performative
from src.schemas.agents import AgentSpec, CooperationRole, KnowledgeBase, Role
from src.schemas.expressions import Compare, Lit, Var
from src.schemas.organization import Community
from src.schemas.rules import (
    DecisionRule,
    EnvironmentOp,
    EventPattern,
    InterpretationRule,
    InterpretationUpdate,
    ReflexEntry,
    ResponseOf,
    Send,
    TaskOf,
)
from src.schemas.scenario import MediationConfig, ScheduledChange

logger = logging.getLogger(__name__)

MEDIATOR = "mediator"
PROPOSAL = 6
OBSERVATION = 0


def _designer(aid: str) -> AgentSpec:
    submit = ReflexEntry(
        pattern=EventPattern(source="environment", key="intent", payload_binder="P"),
        actions=[
            EnvironmentOp(
                op="post",
                params={"target": Lit(value=MEDIATOR), "key": Lit(value="proposal"), "value": Var(name="P")},
            )
        ],
    )
    acknowledge = ReflexEntry(
        pattern=EventPattern(performative=Performative.ANSWER, mtype=PROPOSAL),
        actions=[Send(performative=Performative.CONFIRM, receiver="{sender}", mtype=PROPOSAL, payload=TaskOf(token="ack"), reply=True)],
    )
    return AgentSpec(id=aid, level=1, reflex_map=[submit, acknowledge])


def _decision(rule_id: str, op: str, acceptance: float, verdict: str) -> DecisionRule:
    return DecisionRule(
        id=rule_id,
        event=EventPattern(performative=Performative.EVALUATE, mtype=OBSERVATION, payload_binder="P"),
        condition=Compare(op=op, left=Var(name="P"), right=Lit(value=acceptance)),
        actions=[Send(performative=Performative.ANSWER, receiver="{origin}", mtype=PROPOSAL, payload=ResponseOf(key=verdict, value="P"))],
    )


def _members(acceptance: float) -> Dict[CooperationRole, AgentSpec]:
    def member(role: CooperationRole, level: int, **fields) -> AgentSpec:
        return AgentSpec(id=f"{MEDIATOR}.{role.value}", level=level, actor=MEDIATOR, **fields)

    knowledge = member(
        CooperationRole.KNOWLEDGE,
        3,
        interpreter=[
            InterpretationRule(
                trigger=EventPattern(performative=Performative.INFORM, mtype=OBSERVATION, payload_binder="P"),
                update=[InterpretationUpdate(key="last.{payload_key}", value="P")],
                tag="proposal_seen",
            )
        ],
    )
    control = member(
        CooperationRole.CONTROL,
        2,
        kb=KnowledgeBase(
            rules=[
                _decision("accept-proposal", ">=", acceptance, "accepted"),
                _decision("reject-proposal", "<", acceptance, "rejected"),
            ]
        ),
    )
    return {
        CooperationRole.OBSERVER: member(CooperationRole.OBSERVER, 1),
        CooperationRole.KNOWLEDGE: knowledge,
        CooperationRole.CONTROL: control,
        CooperationRole.MONITORING: member(CooperationRole.MONITORING, 1),
        CooperationRole.MEMORIZATION: member(CooperationRole.MEMORIZATION, 1),
        CooperationRole.COMMUNICATION: member(CooperationRole.COMMUNICATION, 1),
    }


def build_mediation(cfg: MediationConfig, parallel: bool = False) -> World:
    members = _members(cfg.acceptance)
    actor = AgentSpec(id=MEDIATOR, level=4, members={role: spec.id for role, spec in members.items()})
    designers = sorted(set(cfg.designers))

    agents: List[AgentSpec] = [actor, *members.values(), *(_designer(d) for d in designers)]
    agents = apply_mute(agents, cfg.mute)
    roles = {MEDIATOR: Role(name="mediator", level=4)}
    roles.update({spec.id: Role(name=role.value, level=spec.level) for role, spec in members.items()})
    roles.update({d: Role(name="designer", level=1) for d in designers})
    communities = [Community(name="designers", members=designers)]
    system = build_system(agents, roles=roles, organizations=communities)

    scheduled = [ScheduledChange(round=p.round, agent=p.designer, key="intent", value=p.value) for p in cfg.proposals]
    logger.info(f"[Mediation] {len(designers)} designers, {len(cfg.proposals)} proposals")
    return assemble(system, cfg, scheduled, parallel=parallel)
