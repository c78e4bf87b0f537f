import numpy as np
import pytest

from src.errors import NotAuthorized, OutOfRange, SelfEdge, UnknownCommunity
from src.models import build_system
from src.organization import diffuse, reinforce, resolve_community, set_affinity, weight
from src.schemas.acts import ActTemplate, MessageType, Performative, Value
from src.schemas.agents import AgentSpec, Role
from src.schemas.organization import AffinityNetwork, Community

F = Community(name="F", members=["f3", "f1", "f2"])


def _template(sender="f1"):
    return ActTemplate(
        performative=Performative.DIFFUSE,
        sender=sender,
        mtype=MessageType(code=2),
        payload=Value(value=0.6),
        conversation=f"{sender}.0",
    )


def test_set_affinity_returns_a_new_network():
    net = AffinityNetwork()
    updated = set_affinity(net, "f1", "f2", 0.3)
    assert weight(updated, "f1", "f2") == 0.3
    assert weight(updated, "f2", "f1") == 1.0
    assert weight(net, "f1", "f2") == 1.0


def test_set_affinity_rejects_bad_edges():
    with pytest.raises(SelfEdge):
        set_affinity(AffinityNetwork(), "f1", "f1", 0.5)
    with pytest.raises(OutOfRange):
        set_affinity(AffinityNetwork(), "f1", "f2", 1.2)


def test_diffuse_to_every_other_member():
    acts = diffuse("f1", F, _template(), AffinityNetwork())
    assert [a.receiver for a in acts] == ["f2", "f3"]
    assert all(a.conversation == "f1.0" and a.sender == "f1" for a in acts)


def test_diffuse_inhibits_weak_edges():
    net = set_affinity(AffinityNetwork(inhibition_threshold=0.1), "f1", "f3", 0.05)
    assert [a.receiver for a in diffuse("f1", F, _template(), net)] == ["f2"]
    at_threshold = set_affinity(net, "f1", "f2", 0.1)
    assert diffuse("f1", F, _template(), at_threshold) == []


def test_diffuse_needs_membership_or_authorization():
    with pytest.raises(NotAuthorized):
        diffuse("r1", F, _template("r1"), AffinityNetwork())
    acts = diffuse("r1", F, _template("r1"), AffinityNetwork(), authorized=True)
    assert [a.receiver for a in acts] == ["f1", "f2", "f3"]


def test_raising_the_threshold_never_adds_recipients():
    rng = np.random.default_rng(3)
    members = [f"f{i}" for i in range(1, 9)]
    community = Community(name="F", members=members)
    net = AffinityNetwork()
    for member in members[1:]:
        net = set_affinity(net, "f1", member, float(rng.random()))
    previous = None
    for threshold in np.linspace(0.0, 0.95, 20):
        gated = net.model_copy(update={"inhibition_threshold": float(threshold)})
        receivers = {a.receiver for a in diffuse("f1", community, _template(), gated)}
        if previous is not None:
            assert receivers <= previous
        previous = receivers


def test_reinforce_moves_by_outcome():
    net = set_affinity(AffinityNetwork(reinforce_delta=0.1, decay_delta=0.2), "a", "b", 0.5)
    assert weight(reinforce(net, "a", "b", "success"), "a", "b") == pytest.approx(0.6)
    assert weight(reinforce(net, "a", "b", "failure"), "a", "b") == pytest.approx(0.3)


def test_reinforce_stays_in_range():
    rng = np.random.default_rng(0)
    net = AffinityNetwork(reinforce_delta=0.07, decay_delta=0.11)
    for draw in rng.random(10_000):
        net = reinforce(net, "a", "b", "success" if draw < 0.5 else "failure")
        assert 0.0 <= weight(net, "a", "b") <= 1.0


def test_resolve_community():
    system = build_system(
        [AgentSpec(id="f1", level=2)],
        roles={"f1": Role(name="function", level=2)},
        organizations=[Community(name="F", members=["f1"])],
    )
    assert resolve_community(system, "F").members == ("f1",)
    with pytest.raises(UnknownCommunity):
        resolve_community(system, "G")


@pytest.mark.parametrize("seed", range(20))
def test_raising_open_edges_keeps_the_same_receivers(seed):
    rng = np.random.default_rng(seed)
    members = [f"f{i}" for i in range(1, 7)]
    community = Community(name="F", members=members)
    net = AffinityNetwork(inhibition_threshold=0.3)
    for member in members[1:]:
        net = set_affinity(net, "f1", member, round(float(rng.random()), 3))
    receivers = [a.receiver for a in diffuse("f1", community, _template(), net)]
    assert "f1" not in receivers
    assert receivers == sorted(receivers)

    lift = float(rng.random())
    raised = net
    for member in members[1:]:
        w = weight(net, "f1", member)
        if w > net.inhibition_threshold:
            raised = set_affinity(raised, "f1", member, w + (1.0 - w) * lift)
    assert [a.receiver for a in diffuse("f1", community, _template(), raised)] == receivers
