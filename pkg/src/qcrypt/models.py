"""Request and report schemas shared by the CLI and the HTTP service."""
from __future__ import annotations

from typing import Any, Optional, Union

from pydantic import BaseModel, Field, model_validator

SCHEMA_VERSION = 1
SEED_DERIVATION = "sha256(f'{seed}:{i}')[:8] big-endian"

ParamValue = Union[bool, int, str]


class ExperimentRequest(BaseModel):
    params: dict[str, ParamValue] = Field(default_factory=dict)
    seed: int = Field(0, ge=0, lt=1 << 64)
    trials: int = Field(1, ge=1, le=100_000)
    jobs: int = Field(1, ge=1, le=64)


class ExperimentReport(BaseModel):
    schema_: int = Field(SCHEMA_VERSION, alias="schema")
    name: str
    parameters: dict[str, Any]
    seed: str
    seed_derivation: str = SEED_DERIVATION
    trials: int = Field(ge=1)
    successes: int = Field(ge=0)
    success_rate: float = Field(ge=0, le=1)
    confidence_interval: tuple[float, float]
    threshold: Optional[float] = None
    threshold_note: str = ""
    meets_threshold: bool
    algorithm_failures: int = 0
    wall_time: Optional[float] = None
    records: list[dict[str, Any]]

    model_config = {"populate_by_name": True}

    @model_validator(mode="after")
    def _counts_consistent(self):
        if self.successes > self.trials:
            raise ValueError("successes cannot exceed trials")
        return self

    def to_dict(self, timing: bool = False) -> dict:
        """Plain JSON data; wall_time is dropped unless asked for so that reruns compare equal."""
        out = self.model_dump(mode="json", by_alias=True)
        if not timing:
            out["wall_time"] = None
        return out
