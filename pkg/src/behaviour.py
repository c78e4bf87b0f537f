"""
Agent Behaviour Levels
======================
Step functions for reactive (1), routine (2), cognitive (3) and
collective (4) agents. Each one turns an ordered stimulus list into an
ordered effect list; knowledge writes go through the agent's
KnowledgeManager as they happen.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

from src.errors import IncompleteMembers, LevelMismatch, LevelTooLow, RuleError
from src.managers import ActionLog, KnowledgeManager, record_action
from src.protocol import RESPONSES
from src.rules import apply_action, decide, eval_condition, eval_expr, fill_template, match_event
from src.schemas.acts import ActTemplate, Assertion, CommunicationAct, MessageType, Performative, TaskRef
from src.schemas.agents import AgentSpec, CooperationRole
from src.schemas.effects import KnowledgeUpdate, Message, Outbound, OutboundDiffusion, Percept

logger = logging.getLogger(__name__)

__all__ = [
    "ActionLog",
    "StepContext",
    "interpret",
    "observe",
    "record_action",
    "step_agent",
    "step_cognitive",
    "step_collective",
    "step_reactive",
    "step_routine",
]

OBSERVATION = MessageType(code=0, label="observation")


@dataclass
class StepContext:
    """What a step needs beyond the agent: the round, the specs of member
    agents, every agent's knowledge manager and a sink for micro acts."""

    round: int = 0
    agents: Mapping[str, AgentSpec] = field(default_factory=dict)
    managers: Dict[str, KnowledgeManager] = field(default_factory=dict)
    micro_acts: List[CommunicationAct] = field(default_factory=list)

    def knowledge(self, spec: AgentSpec) -> KnowledgeManager:
        manager = self.managers.get(spec.id)
        if manager is None:
            manager = self.managers[spec.id] = KnowledgeManager.from_spec(spec)
        return manager


def _context(agent: AgentSpec, ctx: Optional[StepContext]) -> StepContext:
    return ctx if ctx is not None else StepContext(agents={agent.id: agent})


def _expect_level(agent: AgentSpec, level: int) -> None:
    if agent.level != level:
        raise LevelMismatch(f"{agent.id} is level {agent.level}, not {level}")


# -------------------------------------------------------------------------
# Observation and interpretation
# -------------------------------------------------------------------------
def observe(agent: AgentSpec, inbox: List[CommunicationAct], env_view: List[Percept]) -> list:
    """Inbox acts in arrival order, then percepts ordered by key."""
    stimuli: list = [Message(act=act) for act in inbox]
    stimuli.extend(sorted(env_view, key=lambda p: p.key))
    return stimuli


def _window_count(knowledge: KnowledgeManager, key: str, window: int, now: int) -> int:
    log_key = f"{key}.rounds"
    rounds = knowledge.system_model.get(log_key, [])
    kept = [r for r in rounds if now - r < window]
    kept.append(now)
    knowledge.write(log_key, kept, "system_model")
    return len(kept)


def interpret(
    agent: AgentSpec, stimuli: list, knowledge: Optional[KnowledgeManager] = None, round: int = 0
) -> Tuple[Dict[str, Any], List[str]]:
    """Apply every matching interpretation rule, in rule order per stimulus.

    Returns a copy of the updated system model and the tags of the rules
    that applied.
    """
    if agent.level < 3:
        raise LevelTooLow(f"{agent.id} is level {agent.level}; interpretation needs level 3")
    knowledge = knowledge or KnowledgeManager.from_spec(agent)
    tags: List[str] = []
    for stimulus in stimuli:
        for rule in agent.interpreter:
            binding = match_event(rule.trigger, stimulus)
            if binding is None:
                continue
            try:
                if not eval_condition(rule.condition, binding, knowledge):
                    continue
                for update in rule.update:
                    key = fill_template(update.key, binding)
                    if update.window is not None:
                        value = _window_count(knowledge, key, update.window, round)
                    else:
                        value = eval_expr(update.value, binding, knowledge)
                    knowledge.write(key, value, "system_model")
            except RuleError as e:
                e.rule_id = rule.tag
                raise
            tags.append(rule.tag)
    return dict(knowledge.system_model), tags


# -------------------------------------------------------------------------
# Levels 1 to 3
# -------------------------------------------------------------------------
def _apply_eagerly(effects: list, knowledge: KnowledgeManager) -> None:
    for effect in effects:
        if isinstance(effect, KnowledgeUpdate):
            knowledge.write(effect.key, effect.value, effect.partition)


def step_reactive(agent: AgentSpec, stimuli: list, ctx: Optional[StepContext] = None) -> list:
    """First matching reflex per stimulus; no rule deliberation."""
    _expect_level(agent, 1)
    knowledge = _context(agent, ctx).knowledge(agent)
    effects: list = []
    for stimulus in stimuli:
        for entry in agent.reflex_map:
            binding = match_event(entry.pattern, stimulus)
            if binding is None:
                continue
            produced = [apply_action(action, binding, knowledge, agent.id) for action in entry.actions]
            _apply_eagerly(produced, knowledge)
            effects.extend(produced)
            break
    return effects


def _deliberate(
    agent: AgentSpec, stimuli: list, knowledge: KnowledgeManager, extra: Optional[Dict[str, Any]] = None
) -> list:
    effects: list = []
    for stimulus in stimuli:
        for rule, binding in decide(agent.kb.rules, stimulus, knowledge, extra):
            for action in rule.actions:
                try:
                    effect = apply_action(action, binding, knowledge, agent.id)
                except RuleError as e:
                    e.rule_id = rule.id
                    raise
                if isinstance(effect, KnowledgeUpdate):
                    knowledge.write(effect.key, effect.value, effect.partition)
                effects.append(effect)
    return effects


def step_routine(agent: AgentSpec, stimuli: list, ctx: Optional[StepContext] = None) -> list:
    """Every fired rule per stimulus; knowledge updates are visible to the
    next stimulus of the same step."""
    _expect_level(agent, 2)
    return _deliberate(agent, stimuli, _context(agent, ctx).knowledge(agent))


def step_cognitive(agent: AgentSpec, stimuli: list, ctx: Optional[StepContext] = None) -> list:
    _expect_level(agent, 3)
    ctx = _context(agent, ctx)
    knowledge = ctx.knowledge(agent)
    if stimuli:
        _, tags = interpret(agent, stimuli, knowledge, ctx.round)
        if tags:
            logger.debug(f"[Behaviour] {agent.id} round {ctx.round} interpretations: {tags}")
    return _deliberate(agent, stimuli, knowledge)


# -------------------------------------------------------------------------
# Level 4
# -------------------------------------------------------------------------
def _micro(ctx: StepContext, performative, sender: str, receiver: str, mtype, payload, conversation: str):
    act = CommunicationAct(
        performative=performative,
        sender=sender,
        receiver=receiver,
        mtype=mtype,
        payload=payload,
        conversation=conversation,
        round=ctx.round,
    )
    ctx.micro_acts.append(act)
    return act


def _opened_by(actor_id: str, conversation: str) -> bool:
    owner, _, n = conversation.rpartition(".")
    return owner == actor_id and n.isdigit()


def _closes_own(actor: AgentSpec, stimulus) -> bool:
    if not isinstance(stimulus, Message):
        return False
    act = stimulus.act
    return act.receiver == actor.id and act.performative in RESPONSES and _opened_by(actor.id, act.conversation)


def _order_content(effect) -> Tuple[MessageType, Any]:
    if isinstance(effect, Outbound):
        return effect.act.mtype, effect.act.payload
    if isinstance(effect, OutboundDiffusion):
        return effect.template.mtype, effect.template.payload
    return OBSERVATION, TaskRef(token=effect.kind)


def _communicate(order: CommunicationAct, decided, actor_id: str):
    """The macro effect the communication member emits for an order: the
    order's type and payload, addressed the way control decided, sent by
    the actor."""
    if isinstance(decided, Outbound):
        act = CommunicationAct(
            performative=decided.act.performative,
            sender=actor_id,
            receiver=decided.act.receiver,
            mtype=order.mtype,
            payload=order.payload,
            conversation=decided.act.conversation,
            round=decided.act.round,
        )
        return decided.model_copy(update={"act": act})
    if isinstance(decided, OutboundDiffusion):
        template = ActTemplate(
            performative=decided.template.performative,
            sender=actor_id,
            mtype=order.mtype,
            payload=order.payload,
            conversation=decided.template.conversation,
            round=decided.template.round,
        )
        return decided.model_copy(update={"template": template})
    return decided


def _memorize(memory: KnowledgeManager, acts: List[CommunicationAct]) -> None:
    stored = [*memory.facts.get("memory.acts", []), *(act.model_dump(mode="json") for act in acts)]
    memory.write("memory.acts", stored)
    memory.write("memory.count", len(stored))


def step_collective(actor: AgentSpec, stimuli: list, ctx: Optional[StepContext] = None) -> list:
    """Route each stimulus through the member chain observer, knowledge,
    control, communication. Monitoring and memorization are taps. Only the
    communication member's outputs leave the actor.

    Responses closing a conversation the actor opened are settled by the
    protocol at delivery and do not enter the chain. Outputs addressed to
    the actor itself are dropped.
    """
    _expect_level(actor, 4)
    missing = actor.missing_members()
    if missing:
        raise IncompleteMembers(f"{actor.id} lacks {', '.join(missing)}")
    ctx = _context(actor, ctx)
    specs = {}
    for role, member_id in actor.members.items():
        if member_id not in ctx.agents:
            raise IncompleteMembers(f"{actor.id}: member {member_id} ({role.value}) is not defined")
        specs[role] = ctx.agents[member_id]
    observer = specs[CooperationRole.OBSERVER]
    knowledge = specs[CooperationRole.KNOWLEDGE]
    control = specs[CooperationRole.CONTROL]
    communication = specs[CooperationRole.COMMUNICATION]
    monitor = ctx.knowledge(specs[CooperationRole.MONITORING])
    memory = ctx.knowledge(specs[CooperationRole.MEMORIZATION])

    first_micro = len(ctx.micro_acts)
    effects: list = []
    for index, stimulus in enumerate(stimuli):
        if _closes_own(actor, stimulus):
            monitor.write("closed", monitor.facts.get("closed", 0) + 1)
            continue
        monitor.write("observed", monitor.facts.get("observed", 0) + 1)
        if isinstance(stimulus, Message):
            act = stimulus.act
            origin, mtype, payload, conversation = act.sender, act.mtype, act.payload, act.conversation
        else:
            origin, mtype = stimulus.source or actor.id, OBSERVATION
            payload = Assertion(key=stimulus.key, value=stimulus.value)
            conversation = f"{actor.id}.{ctx.round}.{index}"

        seen = _micro(ctx, Performative.INFORM, observer.id, knowledge.id, mtype, payload, conversation)
        if knowledge.level >= 3:
            interpret(knowledge, [Message(act=seen)], ctx.knowledge(knowledge), ctx.round)
        evaluation = _micro(ctx, Performative.EVALUATE, knowledge.id, control.id, mtype, payload, conversation)

        control_kb = ctx.knowledge(control)
        for decided in _deliberate(control, [Message(act=evaluation)], control_kb, {"origin": origin}):
            if isinstance(decided, KnowledgeUpdate):
                continue
            if isinstance(decided, Outbound) and decided.act.receiver == actor.id:
                monitor.write("dropped", monitor.facts.get("dropped", 0) + 1)
                logger.warning(f"[Behaviour] {actor.id} round {ctx.round}: dropped {decided.act.performative.value} addressed to itself")
                continue
            order_type, order_payload = _order_content(decided)
            order = _micro(ctx, Performative.ORDER, control.id, communication.id, order_type, order_payload, conversation)
            effects.append(_communicate(order, decided, actor.id))

    produced = ctx.micro_acts[first_micro:]
    if produced:
        _memorize(memory, produced)
        logger.debug(f"[Behaviour] {actor.id} round {ctx.round}: {len(produced)} micro acts, {len(effects)} effects")
    return effects


_STEPS = {1: step_reactive, 2: step_routine, 3: step_cognitive, 4: step_collective}


def step_agent(agent: AgentSpec, stimuli: list, ctx: Optional[StepContext] = None) -> list:
    return _STEPS[agent.level](agent, stimuli, ctx)
