"""
Trace record schemas. One record per line in a trace file.
"""

from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from src.schemas.acts import CommunicationAct
from src.schemas.effects import Effect


class _Record(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    round: int = Field(ge=0)


class RoundMarker(_Record):
    kind: Literal["round"] = "round"


class DeliveredAct(_Record):
    kind: Literal["delivered"] = "delivered"
    scope: Literal["micro", "macro"] = "macro"
    act: CommunicationAct


class KnowledgeWrite(_Record):
    kind: Literal["knowledge"] = "knowledge"
    agent: str
    partition: Literal["facts", "system_model"] = "facts"
    key: str
    value: Any = None


class EnvChange(_Record):
    kind: Literal["env"] = "env"
    agent: Optional[str] = None
    key: str
    value: Any = None
    source: Optional[str] = None


class ActionTaken(_Record):
    """An entry of an agent's action log."""

    kind: Literal["action"] = "action"
    agent: str
    effect: Effect


class ProtocolEvent(_Record):
    """Flagged protocol record. ``event`` is one of violation, overdue,
    forbidden, duplicate_ack, unexpected_responder, barrier_complete."""

    kind: Literal["protocol"] = "protocol"
    event: str
    conversation: Optional[str] = None
    detail: str = ""

    @property
    def flagged(self) -> bool:
        return self.event != "barrier_complete"


TraceRecord = Annotated[
    Union[RoundMarker, DeliveredAct, KnowledgeWrite, EnvChange, ActionTaken, ProtocolEvent],
    Field(discriminator="kind"),
]
