"""
Organization
============
Community diffusion gated by the affinity network, and weight emergence
from conversation outcomes.
"""

import logging
from typing import List

from src.errors import NotAuthorized, OutOfRange, SelfEdge, UnknownCommunity
from src.schemas.acts import ActTemplate, CommunicationAct
from src.schemas.organization import AffinityNetwork, Community

logger = logging.getLogger(__name__)


def set_affinity(net: AffinityNetwork, a: str, b: str, w: float) -> AffinityNetwork:
    if a == b:
        raise SelfEdge(f"no affinity edge from {a} to itself")
    if not 0.0 <= w <= 1.0:
        raise OutOfRange(f"weight {w} for {a}->{b} outside [0, 1]")
    weights = {source: dict(row) for source, row in net.weights.items()}
    weights.setdefault(a, {})[b] = float(w)
    return net.model_copy(update={"weights": weights})


def weight(net: AffinityNetwork, a: str, b: str) -> float:
    return net.weight(a, b)


def resolve_community(system, name: str) -> Community:
    community = system.community(name)
    if community is None:
        raise UnknownCommunity(f"no community named {name}")
    return community


def diffuse(
    sender: str,
    community: Community,
    template: ActTemplate,
    net: AffinityNetwork,
    authorized: bool = False,
) -> List[CommunicationAct]:
    """One act per member other than the sender whose edge from the sender
    weighs more than the inhibition threshold, in ascending id order."""
    if sender not in community.members and not authorized:
        raise NotAuthorized(f"{sender} is not a member of {community.name}")
    acts = []
    for member in community.members:
        if member == sender:
            continue
        if net.weight(sender, member) > net.inhibition_threshold:
            acts.append(template.to(member))
        else:
            logger.debug(f"[Organization] {sender}->{member} inhibited in {community.name}")
    return acts


def reinforce(net: AffinityNetwork, a: str, b: str, outcome: str) -> AffinityNetwork:
    """Strengthen the a->b edge on success, weaken it on failure; clamped to [0, 1]."""
    if a == b:
        raise SelfEdge(f"no affinity edge from {a} to itself")
    w = net.weight(a, b)
    if outcome == "success":
        updated = min(1.0, w + net.reinforce_delta)
    elif outcome == "failure":
        updated = max(0.0, w - net.decay_delta)
    else:
        raise ValueError(f"unknown outcome {outcome!r}")
    return set_affinity(net, a, b, updated)
