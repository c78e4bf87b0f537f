"""
Epidemic Scenario
=================
Contaminated agents wander a bounded grid and infect healthy individuals
within a Chebyshev radius. An infected individual consults its doctor, the
doctor accepts and reports the case, and the authority declares an
epidemic for a region once it has counted ``detection_threshold`` cases
within ``detection_window`` rounds. The alert is diffused to the health
community and acknowledged by every doctor.

Movement and infection follow a fixed draw order so an independent
replay reproduces the infected set exactly:

* carriers (agents whose ``contaminated`` key is set at the start of a
  round) act in ascending id order;
* a carrier first moves: one draw ``k`` in [0, 9) from the stream
  ``move.<id>``, offset ``(k % 3 - 1, k // 3 - 1)``, clamped to the grid;
* it then contaminates: for every still-healthy individual within radius,
  in ascending id order, one draw ``u`` from the stream ``infection``;
  ``u < p`` infects.
"""

import logging
from typing import Any, Dict, List, Tuple

from src.environment import Environment
from src.models import build_system
from src.scenarios.base import apply_mute, assemble
from src.scheduler import World
from src.schemas.acts import Performative
from src.schemas.agents import AgentSpec, KnowledgeBase, Role
from src.schemas.effects import Percept
from src.schemas.expressions import Lit
from src.schemas.organization import Community
from src.schemas.rules import (
    AssertionOf,
    DecisionRule,
    Diffuse,
    EnvironmentOp,
    EventPattern,
    InterpretationRule,
    InterpretationUpdate,
    ReflexEntry,
    Send,
    TaskOf,
    UpdateKnowledge,
)
from src.schemas.scenario import EpidemicConfig
from src.schemas.trace import EnvChange

logger = logging.getLogger(__name__)

CONSULT = 3
REPORT = 4
ALERT = 5

CONTAMINATED = "contaminated"
POSITION = "position"
TICK = "tick"
HEALTH_COMMUNITY = "health"

Infection = Tuple[str, str, str]  # target, source, disease


# -------------------------------------------------------------------------
# Movement and infection
# -------------------------------------------------------------------------
class Grid:
    def __init__(self, cfg: EpidemicConfig):
        self.width = cfg.width
        self.height = cfg.height
        self.radius = cfg.proximity_radius
        self.p = cfg.infection_probability
        self.individuals = sorted(ind.id for ind in cfg.individuals)

    def carriers(self, env: Environment) -> List[str]:
        return sorted(aid for aid, keys in env.state.items() if keys.get(CONTAMINATED) is not None)

    def move(self, env: Environment, round: int, agent: str) -> List[EnvChange]:
        x, y = env.get(agent, POSITION)
        k = int(env.streams.stream(f"move.{agent}").integers(0, 9))
        nx = min(max(x + k % 3 - 1, 0), self.width - 1)
        ny = min(max(y + k // 3 - 1, 0), self.height - 1)
        return [env.set(round, agent, POSITION, [nx, ny], source=agent, perceive=False)]

    def contaminate(self, env: Environment, round: int, agent: str) -> List[EnvChange]:
        disease = env.get(agent, CONTAMINATED)
        sx, sy = env.get(agent, POSITION)
        stream = env.streams.stream("infection")
        changes = []
        for target in self.individuals:
            if target == agent or env.get(target, CONTAMINATED) is not None:
                continue
            tx, ty = env.get(target, POSITION)
            if max(abs(tx - sx), abs(ty - sy)) > self.radius:
                continue
            if stream.random() < self.p:
                changes.append(env.set(round, target, CONTAMINATED, disease, source=agent))
        return changes

    def tick(self, env: Environment, round: int) -> List[EnvChange]:
        for carrier in self.carriers(env):
            env.notify(carrier, Percept(key=TICK, value=round))
        return []

    def install(self, env: Environment) -> None:
        env.context["grid"] = self
        env.register("move", lambda e, r, agent, params: self.move(e, r, agent))
        env.register("contaminate", lambda e, r, agent, params: self.contaminate(e, r, agent))
        env.hooks.append(self.tick)


def infections(changes: List[EnvChange]) -> List[Infection]:
    return [(c.agent, c.source, c.value) for c in changes if c.key == CONTAMINATED and c.source is not None]


def infection_step(world: World) -> List[Infection]:
    """Move every carrier and let it contaminate its neighbourhood, outside
    the agent loop. Returns the new infections."""
    env = world.environment
    grid: Grid = env.context["grid"]
    changes: List[EnvChange] = []
    for carrier in grid.carriers(env):
        changes.extend(grid.move(env, world.round, carrier))
        changes.extend(grid.contaminate(env, world.round, carrier))
    world.trace.extend(changes)
    return infections(changes)


# -------------------------------------------------------------------------
# Agents
# -------------------------------------------------------------------------
def _carrier_reflex() -> ReflexEntry:
    return ReflexEntry(
        pattern=EventPattern(source="environment", key=TICK),
        actions=[EnvironmentOp(op="move"), EnvironmentOp(op="contaminate")],
    )


def _contaminant(aid: str) -> AgentSpec:
    return AgentSpec(id=aid, level=1, reflex_map=[_carrier_reflex()])


def _individual(aid: str, doctor: str, region: str) -> AgentSpec:
    consult = ReflexEntry(
        pattern=EventPattern(source="environment", key=CONTAMINATED, payload_binder="D"),
        actions=[
            UpdateKnowledge(key="state", value=Lit(value="patient")),
            Send(performative=Performative.ASK, receiver=doctor, mtype=CONSULT, payload=AssertionOf(key=region, value="D")),
        ],
    )
    kb = KnowledgeBase(facts={"state": "healthy"}, acquaintances=[doctor])
    return AgentSpec(id=aid, level=1, kb=kb, reflex_map=[consult, _carrier_reflex()])


def _ack(rule_id: str, performative: Performative, mtype: int) -> DecisionRule:
    return DecisionRule(
        id=rule_id,
        event=EventPattern(performative=performative, mtype=mtype),
        actions=[Send(performative=Performative.CONFIRM, receiver="{sender}", mtype=mtype, payload=TaskOf(token="ack"), reply=True)],
    )


def _doctor(aid: str, authority: str) -> AgentSpec:
    consultation = EventPattern(performative=Performative.ASK, mtype=CONSULT, payload_binder="D")
    rules = [
        DecisionRule(
            id="accept-consult",
            event=consultation,
            actions=[
                Send(
                    performative=Performative.ACCEPT,
                    receiver="{sender}",
                    mtype=CONSULT,
                    payload=AssertionOf(key="{payload_key}", value="D"),
                    reply=True,
                )
            ],
        ),
        DecisionRule(
            id="report-case",
            event=consultation,
            actions=[
                Send(
                    performative=Performative.INFORM,
                    receiver=authority,
                    mtype=REPORT,
                    payload=AssertionOf(key="{payload_key}", value="D"),
                )
            ],
        ),
        _ack("confirm-alert", Performative.DIFFUSE, ALERT),
    ]
    interpreter = [
        InterpretationRule(
            trigger=consultation,
            update=[InterpretationUpdate(key="last_case.{payload_key}", value="D")],
            tag="consultation",
        )
    ]
    return AgentSpec(id=aid, level=3, kb=KnowledgeBase(rules=rules, acquaintances=[authority]), interpreter=interpreter)


def _authority(aid: str, cfg: EpidemicConfig, regions: List[str], diseases: List[str]) -> AgentSpec:
    report = EventPattern(performative=Performative.INFORM, mtype=REPORT, payload_binder="D")
    interpreter = [
        InterpretationRule(
            trigger=report,
            condition="'known.{D}' in kb",
            update=[InterpretationUpdate(key="cases.{payload_key}", window=cfg.detection_window)],
            tag="case_counted",
        ),
        InterpretationRule(trigger=report, condition="'known.{D}' not in kb", tag="unknown_disease"),
    ]
    declare = (
        "'known.{D}' in kb"
        f" and kb['cases.{{payload_key}}'] >= {cfg.detection_threshold}"
        " and kb['alerted.{payload_key}'] == 0"
    )
    rules = [
        _ack("confirm-report", Performative.INFORM, REPORT),
        DecisionRule(
            id="declare-epidemic",
            event=report,
            condition=declare,
            actions=[
                Diffuse(community=HEALTH_COMMUNITY, mtype=ALERT, payload=AssertionOf(key="{payload_key}", value="D")),
                UpdateKnowledge(key="alerted.{payload_key}", value=1),
            ],
        ),
    ]
    facts: Dict[str, Any] = {f"known.{d}": True for d in diseases}
    facts.update({f"alerted.{region}": 0 for region in regions})
    return AgentSpec(id=aid, level=3, kb=KnowledgeBase(facts=facts, rules=rules), interpreter=interpreter)


def _regional(aid: str, national: str) -> AgentSpec:
    report = EventPattern(performative=Performative.INFORM, mtype=REPORT, payload_binder="D")
    rules = [
        _ack("confirm-report", Performative.INFORM, REPORT),
        DecisionRule(
            id="forward-report",
            event=report,
            actions=[
                Send(
                    performative=Performative.INFORM,
                    receiver=national,
                    mtype=REPORT,
                    payload=AssertionOf(key="{payload_key}", value="D"),
                )
            ],
        ),
    ]
    interpreter = [InterpretationRule(trigger=report, tag="report_forwarded")]
    return AgentSpec(id=aid, level=3, kb=KnowledgeBase(rules=rules, acquaintances=[national]), interpreter=interpreter)


def authority_ids(cfg: EpidemicConfig) -> Tuple[str, str]:
    """(agent doctors report to, agent that detects)."""
    if cfg.authority_tiers == 2:
        return "regional", "national"
    return "authority", "authority"


def build_epidemic(cfg: EpidemicConfig, parallel: bool = False) -> World:
    doctors = sorted(cfg.doctors, key=lambda d: d.id)
    region_of = {d.id: d.region for d in doctors}
    regions = sorted(set(region_of.values()))
    diseases = sorted(set(cfg.known_diseases if cfg.known_diseases is not None else [c.disease for c in cfg.contaminants]))
    reporter, detector = authority_ids(cfg)

    agents: List[AgentSpec] = [_contaminant(c.id) for c in cfg.contaminants]
    for index, ind in enumerate(sorted(cfg.individuals, key=lambda i: i.id)):
        doctor = ind.doctor or doctors[index % len(doctors)].id
        agents.append(_individual(ind.id, doctor, region_of[doctor]))
    agents.extend(_doctor(d.id, reporter) for d in doctors)
    agents.append(_authority(detector, cfg, regions, diseases))
    if reporter != detector:
        agents.append(_regional(reporter, detector))
    agents = apply_mute(agents, cfg.mute)

    roles = {c.id: Role(name="contaminant", level=1) for c in cfg.contaminants}
    roles.update({i.id: Role(name="individual", level=1) for i in cfg.individuals})
    roles.update({d.id: Role(name="doctor", level=3) for d in doctors})
    roles[detector] = Role(name="authority", level=3)
    roles[reporter] = Role(name="authority", level=3)

    communities = [Community(name=HEALTH_COMMUNITY, members=[detector, *region_of])]
    system = build_system(agents, roles=roles, organizations=communities)

    world = assemble(system, cfg, parallel=parallel)
    env = world.environment
    for c in cfg.contaminants:
        env.state[c.id].update({POSITION: list(c.position), CONTAMINATED: c.disease})
    for ind in cfg.individuals:
        env.state[ind.id][POSITION] = list(ind.position)
    Grid(cfg).install(env)
    logger.info(
        f"[Epidemic] {len(cfg.contaminants)} contaminants, {len(cfg.individuals)} individuals, "
        f"{len(doctors)} doctors on a {cfg.width}x{cfg.height} grid"
    )
    return world


def infected_by_round(trace) -> Dict[int, List[str]]:
    """Cumulative infected individuals after each round of a trace."""
    infected: set = set()
    per_round: Dict[int, List[str]] = {}
    for record in trace:
        if record.kind == "round":
            per_round[record.round] = sorted(infected)
        elif record.kind == "env" and record.key == CONTAMINATED and record.source is not None:
            infected.add(record.agent)
            per_round[record.round] = sorted(infected)
    return per_round
