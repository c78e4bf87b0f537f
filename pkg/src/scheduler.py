"""
Round Scheduler
===============
Deterministic discrete-round runtime. Each round runs three phases:

A. deliver the acts sent last round (ascending sender, then send order),
   update conversation obligations and acknowledgment barriers, apply the
   environment changes scheduled for the round;
B. step every top-level agent in ascending id order;
C. turn the collected effects into sent acts, diffusions and environment
   changes, report overdue obligations and update affinities.
"""

import asyncio
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from src.behaviour import StepContext, observe, step_agent
from src.environment import Environment
from src.errors import DuplicateAck, ProtocolViolation, SimulationError, StepError, UnexpectedResponder
from src.managers import ActionLog, KnowledgeManager, MessageManager, record_action
from src.models import SystemModel
from src.organization import diffuse, reinforce, resolve_community
from src.protocol import (
    POSITIVE,
    AckBarrier,
    ConversationTracker,
    ack_barrier_step,
    obligation_table,
    pending_obligations,
    record_act,
)
from src.rng import SeededStreams
from src.schemas.acts import CommunicationAct
from src.schemas.effects import EnvironmentEffect, Outbound, OutboundDiffusion
from src.schemas.organization import AffinityNetwork
from src.schemas.scenario import ProtocolSettings
from src.schemas.trace import (
    ActionTaken,
    DeliveredAct,
    KnowledgeWrite,
    ProtocolEvent,
    RoundMarker,
)
from src.trace import Trace

logger = logging.getLogger(__name__)


@dataclass
class World:
    system: SystemModel
    environment: Environment
    streams: SeededStreams
    round: int = 0
    messages: MessageManager = field(default_factory=MessageManager)
    tracker: ConversationTracker = field(default_factory=ConversationTracker)
    # diffusion conversation -> barrier
    barriers: Dict[str, AckBarrier] = field(default_factory=dict)
    # (owner, awaited conversation) -> acknowledgments held back
    held: Dict[Tuple[str, str], List[CommunicationAct]] = field(default_factory=dict)
    trace: Trace = field(default_factory=Trace)
    knowledge: Dict[str, KnowledgeManager] = field(default_factory=dict)
    action_logs: Dict[str, ActionLog] = field(default_factory=dict)
    affinity: AffinityNetwork = field(default_factory=AffinityNetwork)
    protocol: ProtocolSettings = field(default_factory=ProtocolSettings)
    conversations: Dict[str, int] = field(default_factory=dict)
    parallel: bool = False

    @property
    def nonconformant(self) -> bool:
        return bool(self.trace.flagged())


def create_world(
    system: SystemModel,
    environment: Optional[Environment] = None,
    seed: int = 0,
    protocol: Optional[ProtocolSettings] = None,
    parallel: bool = False,
) -> World:
    streams = environment.streams if environment is not None else SeededStreams(seed)
    protocol = protocol or ProtocolSettings()
    world = World(
        system=system,
        environment=environment or Environment(streams=streams),
        streams=streams,
        tracker=ConversationTracker(table=obligation_table(protocol.obligations)),
        knowledge={aid: KnowledgeManager.from_spec(spec) for aid, spec in sorted(system.agents.items())},
        action_logs={aid: ActionLog(aid) for aid in system.top_level_agents()},
        affinity=system.affinity,
        protocol=protocol,
        parallel=parallel,
    )
    logger.debug(f"[Runtime] World with {len(system.agents)} agents, seed {streams.seed}")
    return world


def _new_conversation(world: World, sender: str) -> str:
    n = world.conversations.get(sender, 0)
    world.conversations[sender] = n + 1
    return f"{sender}.{n}"


def _flag(world: World, event: str, conversation: Optional[str], detail: str) -> None:
    world.trace.append(ProtocolEvent(round=world.round, event=event, conversation=conversation, detail=detail))
    if event != "barrier_complete":
        logger.warning(f"[Protocol] round {world.round} {event} in {conversation}: {detail}")


# -------------------------------------------------------------------------
# Phase A
# -------------------------------------------------------------------------
def _acknowledge(world: World, act: CommunicationAct) -> None:
    barrier = world.barriers.get(act.conversation)
    if barrier is None or act.receiver != barrier.owner or act.performative not in POSITIVE:
        return
    try:
        barrier, complete = ack_barrier_step(barrier, act)
    except (DuplicateAck, UnexpectedResponder) as e:
        event = "duplicate_ack" if isinstance(e, DuplicateAck) else "unexpected_responder"
        _flag(world, event, act.conversation, str(e))
        return
    if not complete:
        world.barriers[act.conversation] = barrier
        return
    del world.barriers[act.conversation]
    _flag(world, "barrier_complete", act.conversation, f"{barrier.owner} received {barrier.expected} acknowledgments")
    if barrier.awaiting is not None:
        for held in world.held.pop((barrier.owner, barrier.awaiting), []):
            world.messages.post(held.model_copy(update={"round": world.round}))


def _deliver(world: World) -> None:
    for act in world.messages.collect():
        world.messages.deliver(act)
        world.trace.append(DeliveredAct(round=world.round, scope="macro", act=act))
        try:
            record_act(world.tracker, act)
        except ProtocolViolation as e:
            _flag(world, "violation", act.conversation, str(e))
        _acknowledge(world, act)


# -------------------------------------------------------------------------
# Phase B
# -------------------------------------------------------------------------
def _step(world: World, aid: str, stimuli: list) -> Tuple[list, List[CommunicationAct]]:
    ctx = StepContext(round=world.round, agents=world.system.agents, managers=world.knowledge)
    try:
        effects = step_agent(world.system.agents[aid], stimuli, ctx)
    except SimulationError as e:
        raise StepError(aid, world.round, e) from e
    return effects, ctx.micro_acts


async def _step_all_parallel(world: World, inputs: List[Tuple[str, list]]):
    return await asyncio.gather(*(asyncio.to_thread(_step, world, aid, stimuli) for aid, stimuli in inputs))


def _step_all(world: World) -> List[Tuple[str, list, List[CommunicationAct]]]:
    inputs = []
    for aid in world.system.top_level_agents():
        spec = world.system.agents[aid]
        stimuli = observe(spec, world.messages.drain(aid), world.environment.percepts_for(aid))
        inputs.append((aid, stimuli))
    if world.parallel and len(inputs) > 1:
        results = asyncio.run(_step_all_parallel(world, inputs))
    else:
        results = [_step(world, aid, stimuli) for aid, stimuli in inputs]
    return [(aid, effects, micro) for (aid, _), (effects, micro) in zip(inputs, results)]


# -------------------------------------------------------------------------
# Phase C
# -------------------------------------------------------------------------
def _send(world: World, act: CommunicationAct, hold: bool = True) -> None:
    if not world.system.allows(act.sender, act.receiver, act.performative):
        _flag(world, "forbidden", act.conversation, f"{act.performative.value} {act.sender}->{act.receiver}")
        return
    held = world.held.get((act.sender, act.conversation)) if hold else None
    if held is not None:
        held.append(act)
        return
    world.messages.post(act)


def _record_writes(world: World, aid: str) -> None:
    spec = world.system.agents[aid]
    for mid in sorted({aid, *spec.members.values()}):
        for partition, key, value in world.knowledge[mid].drain():
            world.trace.append(KnowledgeWrite(round=world.round, agent=mid, partition=partition, key=key, value=value))


def _dispatch(world: World, aid: str, effects: list, snapshot: AffinityNetwork) -> None:
    r = world.round
    spec = world.system.agents[aid]
    tokens: Dict[int, str] = {}
    expanded: Dict[int, List[CommunicationAct]] = {}
    for i, effect in enumerate(effects):
        if isinstance(effect, (Outbound, OutboundDiffusion)) and effect.new_conversation:
            tokens[i] = _new_conversation(world, aid)
        if isinstance(effect, OutboundDiffusion):
            template = effect.template.model_copy(update={"conversation": tokens.get(i, effect.template.conversation), "round": r})
            community = resolve_community(world.system, effect.community)
            authorized = community.name in spec.kb.interaction_config.get("diffuse_to", [])
            acts = diffuse(aid, community, template, snapshot, authorized=authorized)
            expanded[i] = acts
            if effect.ack_barrier and acts:
                world.barriers[template.conversation] = AckBarrier(
                    owner=aid,
                    initiator=template,
                    expected=len(acts),
                    recipients=frozenset(a.receiver for a in acts),
                    awaiting=effect.awaiting,
                )
                if effect.awaiting is not None:
                    world.held.setdefault((aid, effect.awaiting), [])

    for i, effect in enumerate(effects):
        if isinstance(effect, Outbound):
            update = {"round": r}
            if i in tokens:
                update["conversation"] = tokens[i]
            _send(world, effect.act.model_copy(update=update), hold=i not in tokens)
        elif isinstance(effect, OutboundDiffusion):
            for act in expanded[i]:
                _send(world, act, hold=False)
        elif isinstance(effect, EnvironmentEffect):
            world.trace.extend(world.environment.apply(r, aid, effect))


def _settle(world: World) -> None:
    """Report newly overdue obligations and move affinities by outcome."""
    net = world.affinity
    for ob, outcome in world.tracker.drain_resolved():
        net = reinforce(net, ob.act.sender, ob.act.receiver, outcome)
    for ob in pending_obligations(world.tracker, world.round, world.protocol.timeout_rounds):
        if ob.reported_overdue:
            continue
        ob.reported_overdue = True
        _flag(
            world,
            "overdue",
            ob.act.conversation,
            f"{ob.act.performative.value} {ob.act.sender}->{ob.act.receiver} sent in round {ob.act.round}",
        )
        net = reinforce(net, ob.act.sender, ob.act.receiver, "failure")
    world.affinity = net


def schedule_round(world: World) -> World:
    r = world.round
    world.trace.append(RoundMarker(round=r))
    snapshot = world.affinity

    _deliver(world)
    world.trace.extend(world.environment.begin_round(r))

    for aid, effects, micro in _step_all(world):
        try:
            _record_writes(world, aid)
            for act in micro:
                world.messages.record_micro()
                world.trace.append(DeliveredAct(round=r, scope="micro", act=act))
            log = world.action_logs[aid]
            for effect in effects:
                record_action(log, r, effect)
                world.trace.append(ActionTaken(round=r, agent=aid, effect=effect))
            _dispatch(world, aid, effects, snapshot)
        except StepError:
            raise
        except SimulationError as e:
            raise StepError(aid, r, e) from e

    _settle(world)
    world.round = r + 1
    return world


def run(world: World, steps: int) -> Trace:
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    for _ in range(steps):
        schedule_round(world)
    logger.info(
        f"[Runtime] Ran {steps} rounds: {world.messages.sent} acts sent, {world.messages.delivered} delivered, "
        f"{len(world.trace.flagged())} flagged protocol events"
    )
    return world.trace
