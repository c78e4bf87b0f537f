import pytest

from src.scenarios import build_mediation
from src.scenarios.mediation import MEDIATOR
from src.scheduler import run
from src.schemas.acts import Performative, Response
from src.schemas.scenario import MediationConfig, ProposalSpec


def _run(proposals, steps=10, **fields):
    cfg = MediationConfig(designers=["d1", "d2"], proposals=[ProposalSpec(**p) for p in proposals], **fields)
    world = build_mediation(cfg)
    return world, run(world, steps)


def _delivered(trace, scope):
    return [r for r in trace if r.kind == "delivered" and r.scope == scope]


def test_single_proposal_is_answered():
    world, trace = _run([{"round": 0, "designer": "d1", "value": 0.7}])
    micro = _delivered(trace, "micro")
    assert [(r.round, r.act.performative) for r in micro] == [
        (1, Performative.INFORM),
        (1, Performative.EVALUATE),
        (1, Performative.ORDER),
    ]
    macro = [(r.round, r.act.performative.value, r.act.sender, r.act.receiver) for r in _delivered(trace, "macro")]
    assert macro == [(2, "answer", MEDIATOR, "d1"), (3, "confirm", "d1", MEDIATOR)]
    answer = _delivered(trace, "macro")[0].act
    assert answer.payload == Response(key="accepted", value=0.7)
    assert answer.conversation == "mediator.0"
    assert not world.nonconformant


def test_low_proposal_is_rejected():
    _, trace = _run([{"round": 0, "designer": "d2", "value": 0.2}])
    answer = _delivered(trace, "macro")[0].act
    assert answer.receiver == "d2"
    assert answer.payload == Response(key="rejected", value=0.2)


@pytest.mark.parametrize("value, verdict", [(0.49, "rejected"), (0.5, "accepted"), (0.51, "accepted")])
def test_acceptance_boundary(value, verdict):
    _, trace = _run([{"round": 0, "designer": "d1", "value": value}], acceptance=0.5)
    assert _delivered(trace, "macro")[0].act.payload.key == verdict


def test_members_stay_inside_the_actor():
    world, trace = _run(
        [{"round": 0, "designer": "d1", "value": 0.7}, {"round": 2, "designer": "d2", "value": 0.3}]
    )
    members = set(world.system.agents[MEDIATOR].members.values())
    for record in _delivered(trace, "macro"):
        assert record.act.sender not in members
        assert record.act.receiver not in members
    for record in _delivered(trace, "micro"):
        assert record.act.sender in members
        assert record.act.receiver in members


def test_memorization_counts_micro_acts():
    world, trace = _run(
        [{"round": 0, "designer": "d1", "value": 0.7}, {"round": 2, "designer": "d2", "value": 0.3}]
    )
    micro = [r.act.model_dump(mode="json") for r in _delivered(trace, "micro")]
    assert len(micro) == 6
    memory = world.knowledge["mediator.memorization"].facts
    assert memory["memory.acts"] == micro
    assert memory["memory.count"] == 6
    assert world.knowledge["mediator.monitoring"].facts["closed"] == 2
    assert world.knowledge["mediator.monitoring"].facts["observed"] == 2
    assert world.knowledge["mediator.knowledge"].system_model["last.proposal"] == 0.3


def test_mediation_needs_two_designers():
    with pytest.raises(ValueError):
        MediationConfig(designers=["d1"])


def test_run_ends_with_every_obligation_satisfied():
    world, trace = _run(
        [{"round": 0, "designer": "d1", "value": 0.7}, {"round": 2, "designer": "d2", "value": 0.3}]
    )
    assert world.tracker.open() == []
    assert not world.nonconformant
    assert len(_delivered(trace, "micro")) >= 3
    answers = [r for r in _delivered(trace, "macro") if r.act.performative == Performative.ANSWER]
    assert [(a.act.receiver, a.act.conversation) for a in answers] == [("d1", "mediator.0"), ("d2", "mediator.1")]
