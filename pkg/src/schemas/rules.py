"""
Decision rule schemas: event patterns, payload expressions, action specs,
ECA rules and interpretation rules.
"""

from typing import Annotated, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.schemas.acts import Performative
from src.schemas.expressions import ConditionField, ExprField, TrueCond

# Names the matcher binds on its own; a payload binder may not shadow them.
RESERVED_BINDINGS = frozenset({"sender", "conversation", "payload_key", "origin"})


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class EventPattern(_Frozen):
    """What a rule reacts to. ``None`` fields are wildcards."""

    source: Literal["message", "environment"] = "message"
    performative: Optional[Performative] = None
    sender: Optional[str] = None
    mtype: Optional[int] = Field(default=None, ge=0)
    key: Optional[str] = None
    payload_binder: Optional[str] = None

    @model_validator(mode="after")
    def _check(self):
        if self.payload_binder in RESERVED_BINDINGS:
            raise ValueError(f"payload binder {self.payload_binder!r} shadows an implicit binding")
        if self.source == "environment" and (self.performative is not None or self.mtype is not None):
            raise ValueError("environment patterns match on key and sender only")
        if self.source == "message" and self.key is not None:
            raise ValueError("message patterns do not filter on an environment key")
        return self


# -------------------------------------------------------------------------
# Payload expressions
# -------------------------------------------------------------------------
class ValueOf(_Frozen):
    kind: Literal["value"] = "value"
    value: ExprField


class AssertionOf(_Frozen):
    kind: Literal["assertion"] = "assertion"
    key: str = Field(min_length=1)
    value: ExprField


class QuestionOf(_Frozen):
    kind: Literal["question"] = "question"
    key: str = Field(min_length=1)


class ResponseOf(_Frozen):
    kind: Literal["response"] = "response"
    key: str = Field(min_length=1)
    value: ExprField


class TaskOf(_Frozen):
    kind: Literal["task"] = "task"
    token: str = Field(min_length=1)


PayloadExpr = Annotated[
    Union[ValueOf, AssertionOf, QuestionOf, ResponseOf, TaskOf],
    Field(discriminator="kind"),
]


# -------------------------------------------------------------------------
# Actions
# -------------------------------------------------------------------------
class Send(_Frozen):
    """Send one act. ``receiver`` may be a template such as ``{sender}``;
    ``reply`` keeps the stimulus's conversation token."""

    kind: Literal["send"] = "send"
    performative: Performative
    receiver: str = Field(min_length=1)
    mtype: int = Field(ge=0)
    payload: PayloadExpr
    reply: bool = False


class Diffuse(_Frozen):
    """Diffuse to a community. With ``ack_barrier`` the sender's own
    acknowledgment of the triggering act waits for every recipient."""

    kind: Literal["diffuse"] = "diffuse"
    performative: Performative = Performative.DIFFUSE
    community: str = Field(min_length=1)
    mtype: int = Field(ge=0)
    payload: PayloadExpr
    ack_barrier: bool = False


class UpdateKnowledge(_Frozen):
    kind: Literal["update"] = "update"
    key: str = Field(min_length=1)
    value: ExprField
    partition: Literal["facts", "system_model"] = "facts"


class EnvironmentOp(_Frozen):
    kind: Literal["env"] = "env"
    op: str = Field(min_length=1)
    params: Dict[str, ExprField] = Field(default_factory=dict)


ActionSpec = Annotated[
    Union[Send, Diffuse, UpdateKnowledge, EnvironmentOp],
    Field(discriminator="kind"),
]


class DecisionRule(_Frozen):
    """Event-condition-action rule."""

    id: str = Field(min_length=1)
    event: EventPattern
    condition: ConditionField = Field(default_factory=TrueCond)
    actions: List[ActionSpec] = Field(min_length=1)
    priority: int = 0


# -------------------------------------------------------------------------
# Interpretation
# -------------------------------------------------------------------------
class InterpretationUpdate(_Frozen):
    """One write into the system model. ``window`` turns the update into a
    sliding-window count of the rounds it fired in."""

    key: str = Field(min_length=1)
    value: Optional[ExprField] = None
    window: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if self.value is None and self.window is None:
            raise ValueError("an interpretation update needs a value or a window")
        return self


class InterpretationRule(_Frozen):
    trigger: EventPattern
    condition: ConditionField = Field(default_factory=TrueCond)
    update: List[InterpretationUpdate] = Field(default_factory=list)
    tag: str = Field(min_length=1)


class ReflexEntry(_Frozen):
    """One reflex: the first entry whose pattern matches wins."""

    pattern: EventPattern
    actions: List[ActionSpec] = Field(default_factory=list)
