"""
This module contains the seed program model and the reasons a seed can be filtered out.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from source_model.models import SubjectLanguage


class RejectReason(str, Enum):
    too_small = "TooSmall"
    too_large = "TooLarge"


class SeedProgram(BaseModel):
    """
    A subject-language source file paired with its natural-language specification.
    """

    model_config = ConfigDict(frozen=True)

    seed_id: str = Field(min_length=1)
    subject_language: SubjectLanguage
    spec_text: str = Field(min_length=1)
    source_text: str = Field(min_length=1)
    loc: int = Field(ge=0)
    token_estimate: int = Field(ge=0)
    runnable: bool = False
    stdin: str = ""


class RejectedSeed(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: SeedProgram
    reason: RejectReason
