"""
Simulation Errors
=================
Exception hierarchy shared by every layer of the framework.
"""

from typing import Optional


class SimulationError(Exception):
    """Base class for every error raised by the framework."""


# -------------------------------------------------------------------------
# Core model
# -------------------------------------------------------------------------
class ModelError(SimulationError):
    """Raised when a system model violates a structural invariant."""


class UnknownAgent(ModelError):
    """A community, rule or member map names an agent absent from the model."""


class MissingRole(ModelError):
    """An agent has no role assigned."""


class DuplicateCommunity(ModelError):
    """Two communities share a name."""


class UnknownCommunity(ModelError):
    """A diffusion names a community absent from the organizations."""


class SelfMessage(ModelError, ValueError):
    """A communication act whose sender is its receiver."""


# -------------------------------------------------------------------------
# Rules
# -------------------------------------------------------------------------
class RuleError(SimulationError):
    """Raised while matching, evaluating or instantiating a decision rule."""

    def __init__(self, message: str, rule_id: Optional[str] = None):
        super().__init__(message)
        self.rule_id = rule_id

    def __str__(self) -> str:
        base = super().__str__()
        return f"{base} (rule {self.rule_id})" if self.rule_id else base


class MissingBinding(RuleError):
    """An expression references a variable the event did not bind."""


class MissingKnowledgeKey(RuleError):
    """A knowledge lookup names a key present in neither facts nor system model."""


# -------------------------------------------------------------------------
# Behaviour
# -------------------------------------------------------------------------
class BehaviourError(SimulationError):
    pass


class LevelTooLow(BehaviourError):
    """Interpretation requested from an agent below the cognitive level."""


class LevelMismatch(BehaviourError):
    """A step function was called on an agent of another level."""


class IncompleteMembers(BehaviourError):
    """A collective actor lacks one of the cooperation roles."""


class NonMonotoneRound(BehaviourError):
    """An action log entry would go back in time."""


# -------------------------------------------------------------------------
# Protocol
# -------------------------------------------------------------------------
class ProtocolError(SimulationError):
    pass


class ProtocolViolation(ProtocolError):
    """A response act whose performative is not acceptable for the open obligation."""


class DuplicateAck(ProtocolError):
    """An acknowledgment barrier received the same responder twice."""


class UnexpectedResponder(ProtocolError):
    """An acknowledgment came from an agent outside the diffusion set."""


# -------------------------------------------------------------------------
# Organization
# -------------------------------------------------------------------------
class OrganizationError(SimulationError):
    pass


class OutOfRange(OrganizationError, ValueError):
    """An affinity weight outside [0, 1]."""


class SelfEdge(OrganizationError, ValueError):
    """An affinity edge from an agent to itself."""


class NotAuthorized(OrganizationError):
    """A diffusion by an agent neither member of the community nor authorized by role."""


# -------------------------------------------------------------------------
# Configuration and runtime
# -------------------------------------------------------------------------
class ConfigError(SimulationError):
    pass


class InvalidConfig(ConfigError):
    """A scenario or system configuration failed validation."""

    def __init__(self, message: str, details: Optional[list] = None):
        super().__init__(message)
        self.details = details or []


class ParseError(ConfigError):
    """A config or trace file is not well-formed."""

    def __init__(self, message: str, line: int = 0, column: int = 0, path: Optional[str] = None):
        super().__init__(message)
        self.line = line
        self.column = column
        self.path = path

    def __str__(self) -> str:
        where = f"{self.path}:" if self.path else ""
        return f"{where}{self.line}:{self.column}: {super().__str__()}"


class StepError(SimulationError):
    """An agent step failed; wraps the cause with the agent and round."""

    def __init__(self, agent: str, round: int, cause: Exception):
        super().__init__(f"agent {agent} failed in round {round}: {cause}")
        self.agent = agent
        self.round = round
        self.cause = cause
