"""
Interaction Protocol
====================
Required-response table, conversation obligation tracking and the
acknowledgment barrier a diffusing agent waits on before sending its own
acknowledgment.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Literal, Mapping, Optional, Set, Tuple

from src.errors import DuplicateAck, ProtocolViolation, UnexpectedResponder
from src.schemas.acts import ActTemplate, CommunicationAct, Performative

logger = logging.getLogger(__name__)

P = Performative
ObligationTable = Dict[Performative, FrozenSet[Performative]]

DEFAULT_OBLIGATIONS: ObligationTable = {
    P.ASK: frozenset({P.ACCEPT, P.REFUSE}),
    P.INFORM: frozenset({P.CONFIRM}),
    P.DIFFUSE: frozenset({P.CONFIRM}),
    P.ANSWER: frozenset({P.CONFIRM}),
    P.ORDER: frozenset({P.CONFIRM}),
    P.PROPOSE: frozenset({P.CONFIRM, P.REFUSE}),
    P.AGAINST_PROPOSE: frozenset({P.ACCEPT, P.REFUSE}),
    P.EVALUATE: frozenset({P.AGREE, P.DISAGREE}),
    P.CONFIRM: frozenset(),
    P.REFUSE: frozenset(),
    P.ACCEPT: frozenset(),
    P.AGREE: frozenset(),
    P.DISAGREE: frozenset(),
}

POSITIVE = frozenset({P.CONFIRM, P.ACCEPT, P.AGREE})
# performatives that close a conversation and expect nothing back
RESPONSES = frozenset({P.CONFIRM, P.REFUSE, P.ACCEPT, P.AGREE, P.DISAGREE})

Outcome = Literal["success", "failure"]


def obligation_table(overrides: Optional[Mapping[Performative, Iterable[Performative]]] = None) -> ObligationTable:
    """The default table with per-scenario overrides applied."""
    table = dict(DEFAULT_OBLIGATIONS)
    for performative, responses in (overrides or {}).items():
        table[P(performative)] = frozenset(P(r) for r in responses)
    return table


def expected_responses(p: Performative, table: Optional[ObligationTable] = None) -> FrozenSet[Performative]:
    return (table or DEFAULT_OBLIGATIONS).get(p, frozenset())


def outcome_of(performative: Performative) -> Outcome:
    return "success" if performative in POSITIVE else "failure"


# -------------------------------------------------------------------------
# Conversation tracking
# -------------------------------------------------------------------------
@dataclass
class Obligation:
    act: CommunicationAct
    status: Literal["open", "satisfied"] = "open"
    response: Optional[CommunicationAct] = None
    reported_overdue: bool = False

    def answered_by(self, act: CommunicationAct) -> bool:
        return (
            self.status == "open"
            and act.conversation == self.act.conversation
            and act.sender == self.act.receiver
            and act.receiver == self.act.sender
        )


@dataclass
class ConversationTracker:
    """Obligations per conversation token.

    Responses seen before their initiator are parked and matched when the
    initiator arrives. Recording the same act twice is a no-op.
    """

    table: ObligationTable = field(default_factory=lambda: dict(DEFAULT_OBLIGATIONS))
    conversations: Dict[str, List[Obligation]] = field(default_factory=dict)
    parked: Dict[str, List[CommunicationAct]] = field(default_factory=dict)
    seen: Set[CommunicationAct] = field(default_factory=set)
    # (obligation, outcome) pairs not yet consumed by the affinity update
    resolved: List[Tuple[Obligation, Outcome]] = field(default_factory=list)

    def obligations(self) -> List[Obligation]:
        return [ob for token in sorted(self.conversations) for ob in self.conversations[token]]

    def open(self) -> List[Obligation]:
        return [ob for ob in self.obligations() if ob.status == "open"]

    def pending_by_pair(self) -> Dict[Tuple[str, str], int]:
        counts: Dict[Tuple[str, str], int] = {}
        for ob in self.open():
            pair = (ob.act.sender, ob.act.receiver)
            counts[pair] = counts.get(pair, 0) + 1
        return counts

    def drain_resolved(self) -> List[Tuple[Obligation, Outcome]]:
        done, self.resolved = self.resolved, []
        return done

    @property
    def response_performatives(self) -> FrozenSet[Performative]:
        return frozenset().union(*self.table.values())


def _satisfy(tracker: ConversationTracker, ob: Obligation, act: CommunicationAct) -> None:
    acceptable = tracker.table.get(ob.act.performative, frozenset())
    if act.performative not in acceptable:
        raise ProtocolViolation(
            f"{act.performative.value} from {act.sender} in {act.conversation} does not answer "
            f"{ob.act.performative.value} (expected one of {sorted(p.value for p in acceptable)})"
        )
    ob.status = "satisfied"
    ob.response = act
    tracker.resolved.append((ob, outcome_of(act.performative)))


def record_act(tracker: ConversationTracker, act: CommunicationAct) -> ConversationTracker:
    """Open an obligation for an act that requires a response, or satisfy
    the open obligation the act answers.

    Raises ProtocolViolation when the act addresses an open obligation
    with a performative outside its acceptable set.
    """
    if act in tracker.seen:
        return tracker
    tracker.seen.add(act)
    thread = tracker.conversations.get(act.conversation, [])

    for ob in thread:
        if ob.answered_by(act):
            _satisfy(tracker, ob, act)
            return tracker

    if tracker.table.get(act.performative):
        ob = Obligation(act=act)
        tracker.conversations.setdefault(act.conversation, []).append(ob)
        waiting = tracker.parked.get(act.conversation, [])
        for early in list(waiting):
            if ob.answered_by(early):
                waiting.remove(early)
                _satisfy(tracker, ob, early)
                break
        return tracker

    if act.performative in tracker.response_performatives:
        tracker.parked.setdefault(act.conversation, []).append(act)
    return tracker


def pending_obligations(tracker: ConversationTracker, current_round: int, timeout_rounds: int) -> List[Obligation]:
    """Obligations open for more than ``timeout_rounds`` rounds."""
    return [ob for ob in tracker.open() if current_round - ob.act.round > timeout_rounds]


# -------------------------------------------------------------------------
# Acknowledgment barrier
# -------------------------------------------------------------------------
@dataclass(frozen=True)
class AckBarrier:
    """Confirmations a diffusing agent collects before releasing the
    acknowledgment it holds for ``awaiting``."""

    owner: str
    initiator: ActTemplate
    expected: int
    recipients: FrozenSet[str]
    received: FrozenSet[str] = frozenset()
    awaiting: Optional[str] = None

    def __post_init__(self):
        if self.expected < 1:
            raise ValueError("an ack barrier expects at least one acknowledgment")
        if len(self.received) > self.expected:
            raise ValueError("more acknowledgments than expected")

    @property
    def conversation(self) -> str:
        return self.initiator.conversation

    @property
    def complete(self) -> bool:
        return len(self.received) == self.expected


def ack_barrier_step(barrier: AckBarrier, incoming: CommunicationAct) -> Tuple[AckBarrier, bool]:
    if incoming.sender not in barrier.recipients:
        raise UnexpectedResponder(f"{incoming.sender} was not sent {barrier.conversation}")
    if incoming.sender in barrier.received:
        raise DuplicateAck(f"{incoming.sender} already acknowledged {barrier.conversation}")
    updated = replace(barrier, received=barrier.received | {incoming.sender})
    return updated, updated.complete
