"""
ECA Rule Engine
===============
Matches stimuli against event patterns, evaluates conditions against an
agent's knowledge and instantiates actions into effects. All functions
here are pure: knowledge is only read, writes travel as effects.
"""

import logging
import operator
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from src.errors import MissingBinding, MissingKnowledgeKey, RuleError
from src.models import make_act
from src.schemas.acts import (
    NEW_CONVERSATION,
    ActTemplate,
    Assertion,
    MessageType,
    Question,
    Response,
    TaskRef,
    Value,
    payload_key,
)
from src.schemas.effects import (
    EnvironmentEffect,
    KnowledgeUpdate,
    Message,
    Outbound,
    OutboundDiffusion,
    Percept,
)
from src.schemas.expressions import (
    And,
    BinOp,
    Compare,
    HasKey,
    Kb,
    Lit,
    Not,
    Or,
    TrueCond,
    Var,
    render_condition,
    render_expr,
    template_fields,
)
from src.schemas.rules import (
    AssertionOf,
    DecisionRule,
    Diffuse,
    EnvironmentOp,
    EventPattern,
    QuestionOf,
    ReflexEntry,
    ResponseOf,
    Send,
    TaskOf,
    UpdateKnowledge,
    ValueOf,
)

logger = logging.getLogger(__name__)

Binding = Dict[str, Any]

_COMPARE = {
    ">": operator.gt,
    ">=": operator.ge,
    "<": operator.lt,
    "<=": operator.le,
    "=": operator.eq,
    "!=": operator.ne,
}
_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv}


# -------------------------------------------------------------------------
# Matching
# -------------------------------------------------------------------------
def match_event(pattern: EventPattern, stimulus) -> Optional[Binding]:
    """Bindings for a matching stimulus, ``None`` otherwise.

    Messages bind ``sender``, ``conversation`` and, for keyed payloads,
    ``payload_key``; percepts bind ``payload_key`` to the environment key
    and ``sender`` to the causing agent. The payload binder captures the
    scalar content.
    """
    if isinstance(stimulus, Message):
        if pattern.source != "message":
            return None
        act = stimulus.act
        if pattern.performative is not None and act.performative != pattern.performative:
            return None
        if pattern.sender is not None and act.sender != pattern.sender:
            return None
        if pattern.mtype is not None and act.mtype.code != pattern.mtype:
            return None
        binding: Binding = {"sender": act.sender, "conversation": act.conversation}
        key = payload_key(act.payload)
        if key is not None:
            binding["payload_key"] = key
        if pattern.payload_binder:
            binding[pattern.payload_binder] = act.payload.content
        return binding

    if isinstance(stimulus, Percept):
        if pattern.source != "environment":
            return None
        if pattern.key is not None and stimulus.key != pattern.key:
            return None
        if pattern.sender is not None and stimulus.source != pattern.sender:
            return None
        binding = {"payload_key": stimulus.key}
        if stimulus.source is not None:
            binding["sender"] = stimulus.source
        if pattern.payload_binder:
            binding[pattern.payload_binder] = stimulus.value
        return binding

    return None


# -------------------------------------------------------------------------
# Evaluation
# -------------------------------------------------------------------------
def fill_template(template: str, bindings: Binding) -> str:
    if "{" not in template:
        return template
    for name in template_fields(template):
        if name not in bindings:
            raise MissingBinding(f"unbound variable {name} in {template!r}")
    return template.format_map(bindings)


def lookup(kb, key: str) -> Any:
    """Read ``key`` from the facts, then the system model."""
    if key in kb.facts:
        return kb.facts[key]
    if key in kb.system_model:
        return kb.system_model[key]
    raise MissingKnowledgeKey(f"no knowledge key {key!r}")


def eval_expr(expr, bindings: Binding, kb) -> Any:
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Var):
        if expr.name not in bindings:
            raise MissingBinding(f"unbound variable {expr.name}")
        return bindings[expr.name]
    if isinstance(expr, Kb):
        return lookup(kb, fill_template(expr.key, bindings))
    if isinstance(expr, BinOp):
        left = eval_expr(expr.left, bindings, kb)
        right = eval_expr(expr.right, bindings, kb)
        try:
            return _ARITH[expr.op](left, right)
        except (TypeError, ZeroDivisionError) as e:
            raise RuleError(f"cannot evaluate {render_expr(expr)}: {e}") from e
    raise RuleError(f"unknown expression node {expr!r}")


def eval_condition(cond, bindings: Binding, kb) -> bool:
    if isinstance(cond, TrueCond):
        return True
    if isinstance(cond, Compare):
        left = eval_expr(cond.left, bindings, kb)
        right = eval_expr(cond.right, bindings, kb)
        try:
            return bool(_COMPARE[cond.op](left, right))
        except TypeError as e:
            raise RuleError(f"cannot compare in {render_condition(cond)}: {e}") from e
    if isinstance(cond, HasKey):
        key = fill_template(cond.key, bindings)
        return key in kb.facts or key in kb.system_model
    if isinstance(cond, And):
        return all(eval_condition(arg, bindings, kb) for arg in cond.args)
    if isinstance(cond, Or):
        return any(eval_condition(arg, bindings, kb) for arg in cond.args)
    if isinstance(cond, Not):
        return not eval_condition(cond.arg, bindings, kb)
    raise RuleError(f"unknown condition node {cond!r}")


# -------------------------------------------------------------------------
# Decision
# -------------------------------------------------------------------------
def decide(
    rules: List[DecisionRule], stimulus, kb, extra: Optional[Binding] = None
) -> List[Tuple[DecisionRule, Binding]]:
    """Every rule whose event matches and whose condition holds, ordered by
    priority (high first) then rule id."""
    fired = []
    for rule in rules:
        binding = match_event(rule.event, stimulus)
        if binding is None:
            continue
        if extra:
            for name, value in extra.items():
                binding.setdefault(name, value)
        try:
            holds = eval_condition(rule.condition, binding, kb)
        except RuleError as e:
            e.rule_id = rule.id
            raise
        if holds:
            fired.append((rule, binding))
    fired.sort(key=lambda pair: (-pair[0].priority, pair[0].id))
    return fired


# -------------------------------------------------------------------------
# Action
# -------------------------------------------------------------------------
def instantiate_payload(spec, bindings: Binding, kb):
    try:
        if isinstance(spec, ValueOf):
            return Value(value=eval_expr(spec.value, bindings, kb))
        if isinstance(spec, AssertionOf):
            return Assertion(key=fill_template(spec.key, bindings), value=eval_expr(spec.value, bindings, kb))
        if isinstance(spec, QuestionOf):
            return Question(key=fill_template(spec.key, bindings))
        if isinstance(spec, ResponseOf):
            return Response(key=fill_template(spec.key, bindings), value=eval_expr(spec.value, bindings, kb))
        if isinstance(spec, TaskOf):
            return TaskRef(token=fill_template(spec.token, bindings))
    except ValidationError as e:
        raise RuleError(f"payload does not validate: {e.errors()[0]['msg']}") from e
    raise RuleError(f"unknown payload spec {spec!r}")


def apply_action(action, bindings: Binding, kb, self_id: str):
    """Instantiate one action under ``bindings``. Knowledge updates are
    returned as effects; the behaviour layer applies them."""
    if isinstance(action, Send):
        if action.reply:
            if "conversation" not in bindings:
                raise MissingBinding("reply without a conversation to reply in")
            conversation, fresh = bindings["conversation"], False
        else:
            conversation, fresh = NEW_CONVERSATION, True
        act = make_act(
            action.performative,
            self_id,
            fill_template(action.receiver, bindings),
            MessageType(code=action.mtype),
            instantiate_payload(action.payload, bindings, kb),
            conversation,
        )
        return Outbound(act=act, new_conversation=fresh)
    if isinstance(action, Diffuse):
        template = ActTemplate(
            performative=action.performative,
            sender=self_id,
            mtype=MessageType(code=action.mtype),
            payload=instantiate_payload(action.payload, bindings, kb),
            conversation=NEW_CONVERSATION,
        )
        return OutboundDiffusion(
            community=action.community,
            template=template,
            ack_barrier=action.ack_barrier,
            awaiting=bindings.get("conversation") if action.ack_barrier else None,
        )
    if isinstance(action, UpdateKnowledge):
        return KnowledgeUpdate(
            key=fill_template(action.key, bindings),
            value=eval_expr(action.value, bindings, kb),
            partition=action.partition,
        )
    if isinstance(action, EnvironmentOp):
        params = {name: eval_expr(expr, bindings, kb) for name, expr in action.params.items()}
        return EnvironmentEffect(op=action.op, params=params)
    raise RuleError(f"unknown action {action!r}")


# -------------------------------------------------------------------------
# Text dump
# -------------------------------------------------------------------------
def _render_pattern(pattern: EventPattern) -> str:
    parts = [pattern.source]
    if pattern.source == "message":
        parts.append(pattern.performative.value if pattern.performative else "*")
        parts.append(f"from={pattern.sender or '*'}")
        parts.append(f"type={'*' if pattern.mtype is None else pattern.mtype}")
    else:
        parts.append(f"key={pattern.key or '*'}")
        parts.append(f"from={pattern.sender or '*'}")
    if pattern.payload_binder:
        parts.append(f"bind={pattern.payload_binder}")
    return " ".join(parts)


def _render_payload(spec) -> str:
    if isinstance(spec, ValueOf):
        return f"value({render_expr(spec.value)})"
    if isinstance(spec, (AssertionOf, ResponseOf)):
        return f"{spec.kind}({spec.key!r}, {render_expr(spec.value)})"
    if isinstance(spec, QuestionOf):
        return f"question({spec.key!r})"
    return f"task({spec.token!r})"


def render_action(action) -> str:
    if isinstance(action, Send):
        reply = " reply" if action.reply else ""
        return f"send({action.performative.value} -> {action.receiver}, type={action.mtype}, {_render_payload(action.payload)}){reply}"
    if isinstance(action, Diffuse):
        barrier = " ack" if action.ack_barrier else ""
        return f"diffuse({action.performative.value} -> {action.community}, type={action.mtype}, {_render_payload(action.payload)}){barrier}"
    if isinstance(action, UpdateKnowledge):
        return f"update({action.partition}.{action.key} = {render_expr(action.value)})"
    params = ", ".join(f"{k}={render_expr(v)}" for k, v in sorted(action.params.items()))
    return f"env({action.op}: {params})"


def render_rule(rule: DecisionRule) -> str:
    actions = "; ".join(render_action(a) for a in rule.actions)
    return f"{rule.id} p={rule.priority} ON {_render_pattern(rule.event)} IF {render_condition(rule.condition)} DO {actions}"


def dump_rules(rules: List[DecisionRule]) -> str:
    """One rule per line, ordered by rule id."""
    return "\n".join(render_rule(rule) for rule in sorted(rules, key=lambda r: r.id))


def rules_from_reflex_map(reflex_map: List[ReflexEntry]) -> List[DecisionRule]:
    """Decision rules equivalent to a reflex map with disjoint patterns."""
    count = len(reflex_map)
    return [
        DecisionRule(id=f"reflex-{index:03d}", event=entry.pattern, actions=entry.actions, priority=count - index)
        for index, entry in enumerate(reflex_map)
        if entry.actions
    ]
