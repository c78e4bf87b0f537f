import numpy as np
import pytest

from src.errors import MissingBinding, MissingKnowledgeKey
from src.managers import KnowledgeManager
from src.models import make_act
from src.rules import apply_action, decide, dump_rules, eval_condition, eval_expr, match_event
from src.scenarios.configuration import function_rules
from src.schemas.acts import Assertion, Performative, Value
from src.schemas.agents import KnowledgeBase
from src.schemas.effects import KnowledgeUpdate, Message, Outbound, OutboundDiffusion, Percept
from src.schemas.expressions import parse_condition, parse_expr
from src.schemas.rules import DecisionRule, EventPattern, Send, UpdateKnowledge, ValueOf


def _inform(value, sender="r1", receiver="f1", mtype=2):
    return Message(act=make_act("inform", sender, receiver, mtype, Value(value=value), "r1.0"))


def test_match_binds_sender_conversation_and_payload():
    pattern = EventPattern(performative=Performative.INFORM, mtype=2, payload_binder="V")
    binding = match_event(pattern, _inform(0.6))
    assert binding == {"sender": "r1", "conversation": "r1.0", "V": 0.6}


def test_match_filters_on_type_and_sender():
    assert match_event(EventPattern(performative=Performative.INFORM, mtype=3), _inform(0.6)) is None
    assert match_event(EventPattern(sender="r2"), _inform(0.6)) is None
    assert match_event(EventPattern(performative=Performative.ASK), _inform(0.6)) is None


def test_match_percept():
    pattern = EventPattern(source="environment", key="contaminated", payload_binder="D")
    binding = match_event(pattern, Percept(key="contaminated", value="flu", source="c1"))
    assert binding == {"payload_key": "contaminated", "sender": "c1", "D": "flu"}
    assert match_event(pattern, _inform(0.6)) is None


def test_keyed_payload_binds_payload_key():
    act = make_act("inform", "doc1", "authority", 4, Assertion(key="north", value="flu"), "doc1.0")
    binding = match_event(EventPattern(payload_binder="D"), Message(act=act))
    assert binding["payload_key"] == "north"
    assert binding["D"] == "flu"


def test_eval_expr_with_knowledge():
    kb = KnowledgeBase(facts={"cases.north": 2})
    assert eval_expr(parse_expr("kb['cases.{region}'] + 1"), {"region": "north"}, kb) == 3


def test_eval_expr_missing_binding():
    with pytest.raises(MissingBinding):
        eval_expr(parse_expr("V + 1"), {}, KnowledgeBase())


def test_eval_expr_missing_key():
    with pytest.raises(MissingKnowledgeKey):
        eval_expr(parse_expr("kb.cases"), {}, KnowledgeBase())


def test_conditions():
    kb = KnowledgeBase(facts={"known.flu": True, "alerted": 0})
    assert eval_condition(parse_condition("'known.{D}' in kb"), {"D": "flu"}, kb)
    assert not eval_condition(parse_condition("'known.{D}' in kb"), {"D": "pox"}, kb)
    assert eval_condition(parse_condition("kb.alerted == 0 and not 'x' in kb"), {}, kb)
    assert eval_condition(parse_condition("V > 0.4 or V < 0.1"), {"V": 0.05}, kb)
    assert not eval_condition(parse_condition("0.1 < V < 0.4"), {"V": 0.4}, kb)


def test_threshold_rule_fires():
    fired = decide(function_rules(0.4), _inform(0.6), KnowledgeBase())
    assert [rule.id for rule, _ in fired] == ["ack-inform", "delta-1"]


def test_threshold_rule_silent_below():
    fired = decide(function_rules(0.4), _inform(0.3), KnowledgeBase())
    assert [rule.id for rule, _ in fired] == ["ack-inform"]


def test_type_mismatch_fires_nothing():
    assert decide(function_rules(0.4), _inform(0.6, mtype=3), KnowledgeBase()) == []


@pytest.mark.parametrize("step", range(21))
def test_threshold_sweep(step):
    value = round(step * 0.05, 2)
    fired = {rule.id for rule, _ in decide(function_rules(0.4), _inform(value), KnowledgeBase())}
    assert ("delta-1" in fired) == (value > 0.4)


def test_priority_orders_fired_rules():
    pattern = EventPattern(performative=Performative.INFORM, payload_binder="V")
    low = DecisionRule(id="a-low", event=pattern, actions=[UpdateKnowledge(key="x", value="V")])
    high = DecisionRule(id="z-high", event=pattern, actions=[UpdateKnowledge(key="y", value="V")], priority=5)
    fired = decide([low, high], _inform(0.6), KnowledgeBase())
    assert [rule.id for rule, _ in fired] == ["z-high", "a-low"]


def test_condition_error_carries_rule_id():
    rule = DecisionRule(
        id="needs-kb",
        event=EventPattern(performative=Performative.INFORM),
        condition="kb.missing > 1",
        actions=[UpdateKnowledge(key="x", value=1)],
    )
    with pytest.raises(MissingKnowledgeKey) as excinfo:
        decide([rule], _inform(0.6), KnowledgeBase())
    assert excinfo.value.rule_id == "needs-kb"
    assert "needs-kb" in str(excinfo.value)


def test_apply_send_reply_keeps_conversation():
    action = Send(performative=Performative.CONFIRM, receiver="{sender}", mtype=2, payload=ValueOf(value="V"), reply=True)
    effect = apply_action(action, {"sender": "r1", "conversation": "r1.0", "V": 0.6}, KnowledgeBase(), "f1")
    assert isinstance(effect, Outbound)
    assert effect.act.receiver == "r1"
    assert effect.act.conversation == "r1.0"
    assert not effect.new_conversation


def test_apply_send_opens_conversation():
    action = Send(performative=Performative.INFORM, receiver="f2", mtype=2, payload=ValueOf(value=0.5))
    effect = apply_action(action, {}, KnowledgeBase(), "f1")
    assert effect.new_conversation


def test_apply_diffusion_and_update():
    rule = function_rules(0.4, ack_barrier=True)[0]
    binding = {"sender": "r1", "conversation": "r1.0", "V": 0.6}
    effect = apply_action(rule.actions[0], binding, KnowledgeBase(), "f1")
    assert isinstance(effect, OutboundDiffusion)
    assert effect.community == "F"
    assert effect.awaiting == "r1.0"
    assert effect.template.payload.value == 0.6

    update = apply_action(UpdateKnowledge(key="seen.{sender}", value="V"), binding, KnowledgeManager("f1"), "f1")
    assert update == KnowledgeUpdate(key="seen.r1", value=0.6)


def test_dump_rules_is_sorted_one_per_line():
    text = dump_rules(list(reversed(function_rules(0.4))))
    lines = text.splitlines()
    assert [line.split()[0] for line in lines] == ["ack-diffusion", "ack-inform", "delta-1"]
    assert "V > 0.4" in lines[2]
    assert "diffuse(diffuse -> F" in lines[2]


def _random_rule(rng, index):
    performative = [Performative.INFORM, Performative.ASK, None][int(rng.integers(0, 3))]
    op = str(rng.choice([">", ">=", "<", "<="]))
    threshold = round(float(rng.random()), 2)
    return DecisionRule(
        id=f"rule-{index:02d}",
        event=EventPattern(performative=performative, payload_binder="V"),
        condition=f"V {op} {threshold}",
        actions=[UpdateKnowledge(key=f"seen.{index}", value="V")],
        priority=int(rng.integers(0, 3)),
    )


def _fired_pairs(rules, stimulus):
    return {(rule.id, tuple(sorted(binding.items()))) for rule, binding in decide(rules, stimulus, KnowledgeBase())}


@pytest.mark.parametrize("seed", range(30))
def test_adding_a_rule_never_unfires_another(seed):
    rng = np.random.default_rng(seed)
    rules = [_random_rule(rng, i) for i in range(int(rng.integers(1, 8)))]
    extra = _random_rule(rng, 99)
    for _ in range(10):
        stimulus = _inform(round(float(rng.random()), 2))
        before = _fired_pairs(rules, stimulus)
        after = _fired_pairs([*rules, extra], stimulus)
        assert before <= after
        assert after - before <= {p for p in after if p[0] == extra.id}
