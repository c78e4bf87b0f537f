"""
Stimuli an agent observes and the effects its decisions produce.
"""

from typing import Annotated, Any, Dict, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from src.schemas.acts import ActTemplate, CommunicationAct


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class Message(_Frozen):
    kind: Literal["message"] = "message"
    act: CommunicationAct


class Percept(_Frozen):
    """A perceived environment change. ``source`` is the agent whose action
    caused it, when there is one."""

    kind: Literal["percept"] = "percept"
    key: str = Field(min_length=1)
    value: Any = None
    source: Optional[str] = None


Stimulus = Annotated[Union[Message, Percept], Field(discriminator="kind")]


class Outbound(_Frozen):
    kind: Literal["outbound"] = "outbound"
    act: CommunicationAct
    new_conversation: bool = False


class OutboundDiffusion(_Frozen):
    """A diffusion before community expansion. ``awaiting`` is the
    conversation whose acknowledgment the sender holds back until every
    recipient confirmed (ack barrier)."""

    kind: Literal["diffusion"] = "diffusion"
    community: str
    template: ActTemplate
    new_conversation: bool = True
    ack_barrier: bool = False
    awaiting: Optional[str] = None


class KnowledgeUpdate(_Frozen):
    kind: Literal["knowledge"] = "knowledge"
    key: str
    value: Any = None
    partition: Literal["facts", "system_model"] = "facts"


class EnvironmentEffect(_Frozen):
    kind: Literal["environment"] = "environment"
    op: str
    params: Dict[str, Any] = Field(default_factory=dict)


Effect = Annotated[
    Union[Outbound, OutboundDiffusion, KnowledgeUpdate, EnvironmentEffect],
    Field(discriminator="kind"),
]
