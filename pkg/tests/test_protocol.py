from itertools import permutations

import pytest

from src.errors import DuplicateAck, ProtocolViolation, UnexpectedResponder
from src.models import make_act
from src.protocol import (
    AckBarrier,
    ConversationTracker,
    ack_barrier_step,
    expected_responses,
    obligation_table,
    pending_obligations,
    record_act,
)
from src.schemas.acts import ActTemplate, MessageType, Performative, TaskRef, Value

P = Performative


def _act(performative, sender, receiver, conversation="a.0", round=0):
    payload = Value(value=0.5) if performative in ("inform", "ask", "diffuse") else TaskRef(token="ack")
    return make_act(performative, sender, receiver, 2, payload, conversation).model_copy(update={"round": round})


def _statuses(tracker):
    return [(ob.act.conversation, ob.act.performative.value, ob.status) for ob in tracker.obligations()]


def test_expected_responses():
    assert expected_responses(P.ASK) == {P.ACCEPT, P.REFUSE}
    assert expected_responses(P.INFORM) == {P.CONFIRM}
    assert expected_responses(P.EVALUATE) == {P.AGREE, P.DISAGREE}
    assert expected_responses(P.CONFIRM) == frozenset()


def test_obligation_table_overrides():
    table = obligation_table({P.INFORM: []})
    assert expected_responses(P.INFORM, table) == frozenset()
    assert expected_responses(P.ASK, table) == {P.ACCEPT, P.REFUSE}


def test_ask_then_accept():
    tracker = ConversationTracker()
    record_act(tracker, _act("ask", "i1", "doc1"))
    assert len(tracker.open()) == 1
    record_act(tracker, _act("accept", "doc1", "i1", round=1))
    assert tracker.open() == []
    [(ob, outcome)] = tracker.drain_resolved()
    assert outcome == "success"
    assert ob.response.performative == P.ACCEPT


def test_refusal_is_a_failed_outcome():
    tracker = ConversationTracker()
    record_act(tracker, _act("ask", "i1", "doc1"))
    record_act(tracker, _act("refuse", "doc1", "i1"))
    assert [outcome for _, outcome in tracker.drain_resolved()] == ["failure"]


def test_wrong_response_is_a_violation():
    tracker = ConversationTracker()
    record_act(tracker, _act("ask", "i1", "doc1"))
    with pytest.raises(ProtocolViolation):
        record_act(tracker, _act("confirm", "doc1", "i1"))
    assert len(tracker.open()) == 1


def test_response_from_a_third_party_does_not_satisfy():
    tracker = ConversationTracker()
    record_act(tracker, _act("inform", "r1", "f1"))
    record_act(tracker, _act("confirm", "f2", "r1"))
    assert len(tracker.open()) == 1


def test_recording_twice_is_a_noop():
    tracker = ConversationTracker()
    ask = _act("ask", "i1", "doc1")
    record_act(tracker, ask)
    record_act(tracker, ask)
    assert len(tracker.obligations()) == 1


def test_arrival_order_does_not_change_outcome():
    acts = [
        _act("inform", "r1", "f1", "r1.0"),
        _act("confirm", "f1", "r1", "r1.0"),
        _act("diffuse", "f1", "f2", "f1.0"),
        _act("confirm", "f2", "f1", "f1.0"),
        _act("diffuse", "f1", "f3", "f1.0"),
    ]
    outcomes = set()
    for order in permutations(acts):
        tracker = ConversationTracker()
        for act in order:
            record_act(tracker, act)
        outcomes.add(tuple(sorted(_statuses(tracker))))
    assert outcomes == {
        (
            ("f1.0", "diffuse", "open"),
            ("f1.0", "diffuse", "satisfied"),
            ("r1.0", "inform", "satisfied"),
        )
    }


def test_pending_after_timeout():
    tracker = ConversationTracker()
    record_act(tracker, _act("inform", "r1", "f1", round=0))
    assert pending_obligations(tracker, 8, 8) == []
    assert [ob.act.sender for ob in pending_obligations(tracker, 9, 8)] == ["r1"]
    assert tracker.pending_by_pair() == {("r1", "f1"): 1}


def _barrier(expected=2, awaiting="r1.0"):
    template = ActTemplate(
        performative=P.DIFFUSE, sender="f1", mtype=MessageType(code=2), payload=Value(value=0.6), conversation="f1.0"
    )
    return AckBarrier(owner="f1", initiator=template, expected=expected, recipients=frozenset({"f2", "f3"}), awaiting=awaiting)


def test_barrier_completes_on_last_ack():
    barrier = _barrier()
    barrier, complete = ack_barrier_step(barrier, _act("confirm", "f2", "f1", "f1.0"))
    assert not complete
    barrier, complete = ack_barrier_step(barrier, _act("confirm", "f3", "f1", "f1.0"))
    assert complete
    assert barrier.received == {"f2", "f3"}
    assert barrier.conversation == "f1.0"


def test_barrier_rejects_duplicates_and_strangers():
    barrier, _ = ack_barrier_step(_barrier(), _act("confirm", "f2", "f1", "f1.0"))
    with pytest.raises(DuplicateAck):
        ack_barrier_step(barrier, _act("confirm", "f2", "f1", "f1.0"))
    with pytest.raises(UnexpectedResponder):
        ack_barrier_step(barrier, _act("confirm", "f9", "f1", "f1.0"))


def test_barrier_needs_a_positive_count():
    with pytest.raises(ValueError):
        _barrier(expected=0)
