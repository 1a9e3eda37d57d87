"""
This module contains the model profiles, fault-localization tasks and model answers.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from faults.models import FaultKind
from source_model.models import Quartile, SubjectLanguage
from spm.models import AppliedStep


class ProviderKind(str, Enum):
    remote_api = "RemoteApi"
    local_runtime = "LocalRuntime"
    mock = "Mock"


class ApiStyle(str, Enum):
    openai_chat = "openai_chat"
    anthropic_messages = "anthropic_messages"


class MockKind(str, Enum):
    oracle = "Oracle"
    uniform_random = "UniformRandom"
    first_quartile_biased = "FirstQuartileBiased"


class Phase(str, Enum):
    baseline = "Baseline"
    spm = "Spm"


class AnswerStatus(str, Enum):
    answered = "answered"
    skipped = "skipped"


class ModelSpec(BaseModel):
    """
    One model profile. Remote and local profiles need an endpoint; credentials are read from
    the environment variable named by `credential_env`, never from config.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    model_name: str = Field(min_length=1)
    provider: ProviderKind
    endpoint: Optional[str] = None
    model_id: Optional[str] = None
    api_style: ApiStyle = ApiStyle.openai_chat
    credential_env: Optional[str] = None
    auth_header: str = "Authorization"
    temperature: float = Field(default=0.0, ge=0.0, le=2.0)
    max_output_tokens: int = Field(default=1024, ge=1)
    max_concurrent: int = Field(default=4, ge=1)
    requests_per_minute: Optional[float] = Field(default=None, gt=0)
    context_limit_tokens: Optional[int] = Field(default=None, ge=1)
    max_retries: int = Field(default=4, ge=0)
    backoff_s: float = Field(default=1.0, ge=0.0)
    timeout_s: float = Field(default=120.0, gt=0)
    category: Optional[str] = None
    mock_kind: Optional[MockKind] = None
    mock_bias: float = Field(default=0.8, ge=0.0, le=1.0)
    mock_seed: int = 0

    @model_validator(mode="after")
    def _check_provider(self) -> "ModelSpec":
        if self.provider == ProviderKind.mock and self.mock_kind is None:
            raise ValueError(f"Mock profile '{self.model_name}' needs a mock_kind.")
        if self.provider != ProviderKind.mock and not self.endpoint:
            raise ValueError(f"Profile '{self.model_name}' needs an endpoint.")
        return self

    @property
    def remote_model(self) -> str:
        return self.model_id or self.model_name


class FaultLocTask(BaseModel):
    """
    One prompt's worth of work. `ground_truth_line` is a sidecar for scoring and oracle mocks;
    it never enters the prompt.
    """

    model_config = ConfigDict(frozen=True)

    task_id: str
    phase: Phase
    source_text: str
    spec_text: str
    subject_language: SubjectLanguage
    ground_truth_line: int = Field(ge=1)
    line_count: int = Field(ge=1)
    seed_id: str
    fault_id: str
    mutant_id: Optional[str] = None
    fault_kind: FaultKind
    fault_quartile: Quartile
    plan: Optional[str] = None
    steps: Tuple[AppliedStep, ...] = ()

    @model_validator(mode="after")
    def _check_ground_truth(self) -> "FaultLocTask":
        if self.ground_truth_line > self.line_count:
            raise ValueError(
                f"Ground truth line {self.ground_truth_line} is past line {self.line_count}."
            )
        return self


class ModelAnswer(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: str
    model_name: str
    status: AnswerStatus = AnswerStatus.answered
    raw_text: str = ""
    predicted_line: Optional[int] = Field(default=None, ge=1)
    latency_ms: int = Field(default=0, ge=0)
    prompt_tokens: Optional[int] = None
    completion_tokens: Optional[int] = None
    attempts: int = Field(default=0, ge=0)

    @property
    def parsed(self) -> bool:
        return self.predicted_line is not None


@dataclass(frozen=True)
class BackendResponse:
    text: str
    prompt_tokens: Optional[int] = None
    completion_tokens: Optional[int] = None
    latency_ms: int = 0
