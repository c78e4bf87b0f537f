import pytest

from src.scenarios import build_configuration
from src.scheduler import run
from src.schemas.acts import Performative
from src.schemas.organization import AffinityNetwork
from src.schemas.scenario import ConfigurationConfig


def _macro(trace):
    return [r for r in trace if r.kind == "delivered" and r.scope == "macro"]


def _run(steps=12, **fields):
    world = build_configuration(ConfigurationConfig(**fields))
    return world, run(world, steps)


def test_handshake_with_three_functions():
    world, trace = _run(functions=3, values=[0.6])
    delivered = [(r.round, r.act.performative.value, r.act.sender, r.act.receiver) for r in _macro(trace)]
    assert delivered == [
        (1, "inform", "r1", "f1"),
        (2, "diffuse", "f1", "f2"),
        (2, "diffuse", "f1", "f3"),
        (3, "confirm", "f2", "f1"),
        (3, "confirm", "f3", "f1"),
        (4, "confirm", "f1", "r1"),
    ]
    assert not world.nonconformant
    assert [e.event for e in trace if e.kind == "protocol"] == ["barrier_complete"]


@pytest.mark.parametrize("functions", [1, 2, 3, 5, 8])
def test_delivered_acts_scale_with_function_community(functions):
    world, trace = _run(functions=functions, values=[0.6])
    assert len(_macro(trace)) == 2 * functions
    assert world.tracker.open() == []


def test_value_below_threshold_is_only_acknowledged():
    world, trace = _run(functions=3, values=[0.3])
    assert [r.act.performative for r in _macro(trace)] == [Performative.INFORM, Performative.CONFIRM]
    assert not world.nonconformant


def test_threshold_one_never_diffuses():
    _, trace = _run(functions=3, values=[1.0], threshold=1.0)
    assert len(_macro(trace)) == 2


def test_own_ack_waits_for_the_barrier():
    _, trace = _run(functions=3, values=[0.6])
    own = [r for r in _macro(trace) if r.act.sender == "f1" and r.act.receiver == "r1"]
    barrier = [r for r in trace if r.kind == "protocol" and r.event == "barrier_complete"]
    assert own[0].round == barrier[0].round + 1
    assert own[0].act.conversation == "r1.0"


def test_without_barrier_ack_is_immediate():
    _, trace = _run(functions=3, values=[0.6], ack_barrier=False)
    own = [r for r in _macro(trace) if r.act.sender == "f1" and r.act.receiver == "r1"]
    assert own[0].round == 2


def test_terminates_within_bound():
    for functions in (2, 3, 5):
        world, trace = _run(steps=2 * functions + 4, functions=functions, values=[0.8])
        assert world.tracker.open() == []
        assert world.messages.in_flight == 0
        assert world.held == {}


def test_inhibited_edge_shrinks_diffusion():
    affinity = AffinityNetwork(weights={"f1": {"f3": 0.05}})
    _, trace = _run(functions=3, values=[0.6], affinity=affinity)
    receivers = [r.act.receiver for r in _macro(trace) if r.act.performative == Performative.DIFFUSE]
    assert receivers == ["f2"]
    assert len(_macro(trace)) == 4


def test_silent_function_agent_is_detected():
    world, trace = _run(steps=12, functions=3, values=[0.6], mute=["f2"])
    overdue = sorted(e.conversation for e in trace.flagged() if e.event == "overdue")
    assert overdue == ["f1.0", "r1.0"]
    assert world.nonconformant
    assert world.affinity.weight("f1", "f2") == pytest.approx(0.95)
    assert world.affinity.weight("r1", "f1") == pytest.approx(0.95)
    assert world.affinity.weight("f1", "f3") == 1.0


def test_several_requirements_share_functions():
    world, trace = _run(requirements=2, functions=2, values=[0.6, 0.7])
    informs = [(r.act.sender, r.act.receiver) for r in _macro(trace) if r.act.performative == Performative.INFORM]
    assert informs == [("r1", "f1"), ("r2", "f2")]
    assert world.tracker.open() == []


def test_configured_threshold_lives_in_the_diffusion_rule():
    world, trace = _run(functions=3, values=[0.6], threshold=0.7)
    f1 = world.system.agents["f1"]
    assert f1.kb.facts == {}
    assert f1.kb.rules[0].condition.right.value == 0.7
    assert [r.act.performative for r in _macro(trace)] == [Performative.INFORM, Performative.CONFIRM]
