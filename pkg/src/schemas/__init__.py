from src.schemas.acts import (
    ActTemplate,
    AgentId,
    Assertion,
    CommunicationAct,
    MessageType,
    Payload,
    Performative,
    Question,
    Response,
    TaskRef,
    Value,
)
from src.schemas.agents import AgentSpec, CooperationRole, KnowledgeBase, Role
from src.schemas.effects import (
    Effect,
    EnvironmentEffect,
    KnowledgeUpdate,
    Message,
    Outbound,
    OutboundDiffusion,
    Percept,
    Stimulus,
)
from src.schemas.organization import AffinityNetwork, Community, Interaction
from src.schemas.rules import (
    ActionSpec,
    DecisionRule,
    Diffuse,
    EnvironmentOp,
    EventPattern,
    InterpretationRule,
    InterpretationUpdate,
    ReflexEntry,
    Send,
    UpdateKnowledge,
)
