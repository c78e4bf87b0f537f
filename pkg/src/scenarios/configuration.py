"""
Product Configuration Scenario
==============================
Requirement, function, solution and constraint communities of routine
agents. Each requirement agent is given a value at round 0 and informs
one function agent (round-robin). A function agent receiving a value above
the threshold diffuses it to the rest of the function community and
holds its own acknowledgment until every recipient has confirmed.
"""

import logging
from typing import List

from src.models import build_system
from src.scenarios.base import apply_mute, assemble
from src.scheduler import World
from src.schemas.acts import Performative
from src.schemas.agents import AgentSpec, KnowledgeBase, Role
from src.schemas.expressions import Compare, Lit, Var
from src.schemas.organization import Community
from src.schemas.rules import DecisionRule, Diffuse, EventPattern, Send, TaskOf, ValueOf
from src.schemas.scenario import ConfigurationConfig, ScheduledChange

logger = logging.getLogger(__name__)

VALUE = 2
COMMUNITIES = (("R", "r", "requirement"), ("F", "f", "function"), ("S", "s", "solution"), ("C", "c", "constraint"))


def _confirm(rule_id: str, performative: Performative) -> DecisionRule:
    return DecisionRule(
        id=rule_id,
        event=EventPattern(performative=performative, mtype=VALUE),
        actions=[Send(performative=Performative.CONFIRM, receiver="{sender}", mtype=VALUE, payload=TaskOf(token="ack"), reply=True)],
    )


def function_rules(threshold: float, ack_barrier: bool = True) -> List[DecisionRule]:
    """The threshold diffusion rule plus the acknowledgments a function agent owes."""
    delta = DecisionRule(
        id="delta-1",
        event=EventPattern(performative=Performative.INFORM, mtype=VALUE, payload_binder="V"),
        condition=Compare(op=">", left=Var(name="V"), right=Lit(value=threshold)),
        actions=[Diffuse(community="F", mtype=VALUE, payload=ValueOf(value="V"), ack_barrier=ack_barrier)],
    )
    return [delta, _confirm("ack-inform", Performative.INFORM), _confirm("ack-diffusion", Performative.DIFFUSE)]


def _requirement(aid: str, function: str) -> AgentSpec:
    inform = DecisionRule(
        id="inform-value",
        event=EventPattern(source="environment", key="value", payload_binder="V"),
        actions=[Send(performative=Performative.INFORM, receiver=function, mtype=VALUE, payload=ValueOf(value="V"))],
    )
    return AgentSpec(id=aid, level=2, kb=KnowledgeBase(rules=[inform], acquaintances=[function]))


def build_configuration(cfg: ConfigurationConfig, parallel: bool = False) -> World:
    sizes = {"R": cfg.requirements, "F": cfg.functions, "S": cfg.solutions, "C": cfg.constraints}
    ids = {name: [f"{prefix}{i}" for i in range(1, sizes[name] + 1)] for name, prefix, _ in COMMUNITIES}
    functions = ids["F"]

    agents: List[AgentSpec] = []
    for index, rid in enumerate(ids["R"]):
        agents.append(_requirement(rid, functions[index % len(functions)]))
    for fid in functions:
        kb = KnowledgeBase(rules=function_rules(cfg.threshold, cfg.ack_barrier))
        agents.append(AgentSpec(id=fid, level=2, kb=kb))
    for aid in [*ids["S"], *ids["C"]]:
        agents.append(AgentSpec(id=aid, level=2, kb=KnowledgeBase(rules=[_confirm("ack-inform", Performative.INFORM)])))
    agents = apply_mute(agents, cfg.mute)

    roles = {aid: Role(name=role, level=2) for name, _, role in COMMUNITIES for aid in ids[name]}
    communities = [Community(name=name, members=ids[name]) for name, _, _ in COMMUNITIES]
    system = build_system(agents, roles=roles, organizations=communities, affinity=cfg.affinity)

    scheduled = [ScheduledChange(round=0, agent=rid, key="value", value=v) for rid, v in zip(ids["R"], cfg.values)]
    logger.info(f"[Configuration] |R|={cfg.requirements} |F|={cfg.functions} threshold={cfg.threshold}")
    return assemble(system, cfg, scheduled, parallel=parallel)
