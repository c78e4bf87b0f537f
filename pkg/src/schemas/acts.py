"""
Communication act schemas: the performative lexicon, message types,
payloads and the act itself.
"""

from enum import Enum
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

AgentId = Annotated[str, Field(min_length=1)]

# Scalar content carried by payloads and bindings.
Scalar = Union[bool, int, float, str]

NEW_CONVERSATION = "new"


class Performative(str, Enum):
    """Closed lexicon of speech acts."""

    INFORM = "inform"
    DIFFUSE = "diffuse"
    ASK = "ask"
    ANSWER = "answer"
    CONFIRM = "confirm"
    PROPOSE = "propose"
    AGAINST_PROPOSE = "against_propose"
    REFUSE = "refuse"
    ACCEPT = "accept"
    ORDER = "order"
    AGREE = "agree"
    DISAGREE = "disagree"
    EVALUATE = "evaluate"

    @classmethod
    def parse(cls, token: str) -> "Performative":
        # "reply" is the lexicon's alias for answer
        if token == "reply":
            return cls.ANSWER
        return cls(token.replace("-", "_"))


class Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class MessageType(Frozen):
    code: int = Field(ge=0)
    label: Optional[str] = None


class Value(Frozen):
    kind: Literal["value"] = "value"
    value: float = Field(ge=0.0, le=1.0)

    @property
    def content(self) -> Scalar:
        return self.value


class Assertion(Frozen):
    kind: Literal["assertion"] = "assertion"
    key: str = Field(min_length=1)
    value: Scalar

    @property
    def content(self) -> Scalar:
        return self.value


class Question(Frozen):
    kind: Literal["question"] = "question"
    key: str = Field(min_length=1)

    @property
    def content(self) -> Scalar:
        return self.key


class Response(Frozen):
    kind: Literal["response"] = "response"
    key: str = Field(min_length=1)
    value: Scalar

    @property
    def content(self) -> Scalar:
        return self.value


class TaskRef(Frozen):
    kind: Literal["task"] = "task"
    token: str = Field(min_length=1)

    @property
    def content(self) -> Scalar:
        return self.token


Payload = Annotated[
    Union[Value, Assertion, Question, Response, TaskRef],
    Field(discriminator="kind"),
]


def payload_key(payload) -> Optional[str]:
    """Key of a keyed payload (assertion, question, response), else None."""
    return getattr(payload, "key", None)


class CommunicationAct(Frozen):
    """One speech act: performative, sender, receiver, type and payload,
    plus the conversation token and the round it was sent in."""

    performative: Performative
    sender: AgentId
    receiver: AgentId
    mtype: MessageType
    payload: Payload
    conversation: str = Field(min_length=1)
    round: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _distinct_parties(self):
        if self.sender == self.receiver:
            raise ValueError(f"act from {self.sender} to itself")
        return self


class ActTemplate(Frozen):
    """A diffusion act before the receiver is filled in."""

    performative: Performative
    sender: AgentId
    mtype: MessageType
    payload: Payload
    conversation: str = Field(min_length=1)
    round: int = Field(default=0, ge=0)

    def to(self, receiver: str) -> CommunicationAct:
        return CommunicationAct(
            performative=self.performative,
            sender=self.sender,
            receiver=receiver,
            mtype=self.mtype,
            payload=self.payload,
            conversation=self.conversation,
            round=self.round,
        )
