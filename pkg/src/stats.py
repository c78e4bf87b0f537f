"""
Trace Statistics
================
Summary of a trace: delivered acts per round and performative, the
micro/macro split, infections and the obligations a replay of the macro
acts opens and satisfies.
"""

from collections import Counter, defaultdict
from typing import Any, Dict

from src.errors import ProtocolViolation
from src.protocol import ConversationTracker, record_act
from src.trace import Trace


def summarize(trace: Trace) -> Dict[str, Any]:
    per_round: Dict[int, Counter] = defaultdict(Counter)
    scope = Counter()
    events = Counter()
    rounds = infections = 0
    tracker = ConversationTracker()
    violations = 0
    for record in trace:
        if record.kind == "round":
            rounds += 1
        elif record.kind == "delivered":
            scope[record.scope] += 1
            per_round[record.round][record.act.performative.value] += 1
            if record.scope == "macro":
                try:
                    record_act(tracker, record.act)
                except ProtocolViolation:
                    violations += 1
        elif record.kind == "env" and record.key == "contaminated" and record.source is not None:
            infections += 1
        elif record.kind == "protocol":
            events[record.event] += 1
    obligations = tracker.obligations()
    return {
        "rounds": rounds,
        "macro": scope["macro"],
        "micro": scope["micro"],
        "infections": infections,
        "obligations_opened": len(obligations),
        "obligations_satisfied": sum(1 for ob in obligations if ob.status == "satisfied"),
        "violations": violations,
        "protocol_events": dict(sorted(events.items())),
        "per_round": {r: dict(sorted(per_round[r].items())) for r in sorted(per_round)},
    }


def format_summary(summary: Dict[str, Any]) -> str:
    lines = [
        f"rounds={summary['rounds']}",
        f"delivered macro={summary['macro']} micro={summary['micro']}",
        f"infections={summary['infections']}",
        f"obligations opened={summary['obligations_opened']} satisfied={summary['obligations_satisfied']}",
        f"violations={summary['violations']}",
    ]
    for event, count in summary["protocol_events"].items():
        lines.append(f"protocol {event}={count}")
    for r, counts in summary["per_round"].items():
        lines.append(f"round {r}: " + " ".join(f"{p}={n}" for p, n in counts.items()))
    return "\n".join(lines)
