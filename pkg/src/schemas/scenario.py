"""
Scenario config file schemas.

A config file is one JSON object ``{"scenario": <name>, "parameters": {...}}``
where ``name`` is epidemic, configuration, mediation or system. See
docs/CONFIG_FORMAT.md.
"""

from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.schemas.acts import Performative
from src.schemas.agents import AgentSpec, Role
from src.schemas.organization import AffinityNetwork, Community, Interaction


class _Config(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProtocolSettings(_Config):
    timeout_rounds: int = Field(default=8, ge=1)
    # Overrides of the required-response table, performative -> responses
    obligations: Optional[Dict[Performative, List[Performative]]] = None


class ScheduledChange(_Config):
    """An environment change applied at the start of ``round``."""

    round: int = Field(ge=0)
    agent: str = Field(min_length=1)
    key: str = Field(min_length=1)
    value: Any = None


class ScenarioParams(_Config):
    seed: int = Field(default=7, ge=0)
    steps: int = Field(default=20, ge=0)
    protocol: ProtocolSettings = Field(default_factory=ProtocolSettings)
    # Agents whose rules and reflexes are removed: they never respond
    mute: List[str] = Field(default_factory=list)


# -------------------------------------------------------------------------
# Epidemic
# -------------------------------------------------------------------------
Position = Tuple[int, int]


class ContaminantSpec(_Config):
    id: str = Field(min_length=1)
    position: Position
    disease: str = Field(min_length=1)


class IndividualSpec(_Config):
    id: str = Field(min_length=1)
    position: Position
    doctor: Optional[str] = None


class DoctorSpec(_Config):
    id: str = Field(min_length=1)
    region: str = Field(min_length=1)


class EpidemicConfig(ScenarioParams):
    width: int = Field(default=5, ge=1)
    height: int = Field(default=5, ge=1)
    contaminants: List[ContaminantSpec] = Field(default_factory=list)
    individuals: List[IndividualSpec] = Field(default_factory=list)
    doctors: List[DoctorSpec] = Field(default_factory=list)
    infection_probability: float = Field(default=0.5, ge=0.0, le=1.0)
    proximity_radius: int = Field(default=1, ge=0)
    detection_threshold: int = Field(default=3, ge=1)
    detection_window: int = Field(default=5, ge=1)
    authority_tiers: Literal[1, 2] = 1
    known_diseases: Optional[List[str]] = None

    @model_validator(mode="after")
    def _check(self):
        for spec in [*self.contaminants, *self.individuals]:
            x, y = spec.position
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise ValueError(f"{spec.id} at {spec.position} is outside the {self.width}x{self.height} grid")
        ids = [s.id for s in [*self.contaminants, *self.individuals, *self.doctors]]
        if len(ids) != len(set(ids)):
            raise ValueError("agent ids must be unique")
        if self.individuals and not self.doctors:
            raise ValueError("individuals need at least one doctor")
        doctors = {d.id for d in self.doctors}
        for ind in self.individuals:
            if ind.doctor is not None and ind.doctor not in doctors:
                raise ValueError(f"{ind.id} names unknown doctor {ind.doctor}")
        return self


# -------------------------------------------------------------------------
# Product configuration
# -------------------------------------------------------------------------
class ConfigurationConfig(ScenarioParams):
    requirements: int = Field(default=1, ge=1)
    functions: int = Field(default=3, ge=1)
    solutions: int = Field(default=1, ge=1)
    constraints: int = Field(default=1, ge=1)
    values: List[float] = Field(default_factory=lambda: [0.6])
    threshold: float = Field(default=0.4, ge=0.0, le=1.0)
    ack_barrier: bool = True
    affinity: AffinityNetwork = Field(default_factory=AffinityNetwork)

    @model_validator(mode="after")
    def _check(self):
        if len(self.values) != self.requirements:
            raise ValueError(f"{self.requirements} requirement agents need {self.requirements} values")
        if any(not 0.0 <= v <= 1.0 for v in self.values):
            raise ValueError("requirement values must lie in [0, 1]")
        return self


# -------------------------------------------------------------------------
# Mediation
# -------------------------------------------------------------------------
class ProposalSpec(_Config):
    round: int = Field(ge=0)
    designer: str = Field(min_length=1)
    value: float = Field(ge=0.0, le=1.0)


class MediationConfig(ScenarioParams):
    designers: List[str] = Field(default_factory=lambda: ["d1", "d2"])
    proposals: List[ProposalSpec] = Field(default_factory=list)
    acceptance: float = Field(default=0.5, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check(self):
        if len(set(self.designers)) < 2:
            raise ValueError("mediation needs at least two designers")
        for proposal in self.proposals:
            if proposal.designer not in self.designers:
                raise ValueError(f"proposal from unknown designer {proposal.designer}")
        return self


# -------------------------------------------------------------------------
# Free-form system
# -------------------------------------------------------------------------
class SystemConfig(ScenarioParams):
    agents: List[AgentSpec] = Field(default_factory=list)
    roles: Dict[str, Role] = Field(default_factory=dict)
    communities: List[Community] = Field(default_factory=list)
    interactions: List[Interaction] = Field(default_factory=list)
    affinity: AffinityNetwork = Field(default_factory=AffinityNetwork)
    scheduled: List[ScheduledChange] = Field(default_factory=list)


class EpidemicScenario(_Config):
    scenario: Literal["epidemic"]
    parameters: EpidemicConfig = Field(default_factory=EpidemicConfig)


class ConfigurationScenario(_Config):
    scenario: Literal["configuration"]
    parameters: ConfigurationConfig = Field(default_factory=ConfigurationConfig)


class MediationScenario(_Config):
    scenario: Literal["mediation"]
    parameters: MediationConfig = Field(default_factory=MediationConfig)


class SystemScenario(_Config):
    scenario: Literal["system"]
    parameters: SystemConfig = Field(default_factory=SystemConfig)


ScenarioFile = Annotated[
    Union[EpidemicScenario, ConfigurationScenario, MediationScenario, SystemScenario],
    Field(discriminator="scenario"),
]
