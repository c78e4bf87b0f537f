"""
Organization schemas: communities, allowed interactions and the fuzzy
affinity network.
"""

from typing import Dict, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.schemas.acts import Performative

DEFAULT_WEIGHT = 1.0


class Community(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(min_length=1)
    members: Tuple[str, ...] = Field(min_length=1)

    @field_validator("members")
    @classmethod
    def _canonical(cls, members):
        # set semantics, canonical order
        return tuple(sorted(set(members)))


class Interaction(BaseModel):
    """An allowed (sender role, receiver role, performative) triple."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sender_role: str = Field(min_length=1)
    receiver_role: str = Field(min_length=1)
    performative: Performative


class AffinityNetwork(BaseModel):
    """Directed fuzzy weights between agents. Missing pairs weigh 1.0.

    ``weights`` is nested source -> target -> weight so it serializes to
    plain JSON.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    weights: Dict[str, Dict[str, float]] = Field(default_factory=dict)
    inhibition_threshold: float = Field(default=0.1, ge=0.0, lt=1.0)
    reinforce_delta: float = Field(default=0.05, gt=0.0, lt=1.0)
    decay_delta: float = Field(default=0.05, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _check(self):
        for source, row in self.weights.items():
            for target, w in row.items():
                if source == target:
                    raise ValueError(f"self edge on {source}")
                if not 0.0 <= w <= 1.0:
                    raise ValueError(f"weight {source}->{target}={w} outside [0, 1]")
        return self

    def weight(self, source: str, target: str) -> float:
        return self.weights.get(source, {}).get(target, DEFAULT_WEIGHT)
