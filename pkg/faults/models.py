"""
This module contains the fault kinds, candidate fault sites and injected fault records.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from corpus.models import SeedProgram
from source_model.models import Quartile, Span, StatementBoundary, SubjectLanguage


class FaultKind(str, Enum):
    off_by_one = "OffByOne"
    misplaced_return = "MisplacedReturn"
    incorrect_boolean_logic = "IncorrectBooleanLogic"
    operator_swap = "OperatorSwap"


FAULT_KINDS = (
    FaultKind.off_by_one,
    FaultKind.misplaced_return,
    FaultKind.incorrect_boolean_logic,
    FaultKind.operator_swap,
)


@dataclass(frozen=True)
class FaultSite:
    """
    A location where one fault of `kind` can be injected. `span` covers the token or bound
    expression to rewrite; MisplacedReturn sites carry the boundary to insert before instead.
    """

    kind: FaultKind
    line: int
    span: Optional[Span] = None
    text: str = ""
    int_value: Optional[int] = None
    atomic: bool = True
    boundary: Optional[StatementBoundary] = None


class InjectedFault(BaseModel):
    """
    One seeded single-line fault. `fault_line` is a line of `faulty_source`; `original_line`
    is the line of the seed the edit was anchored to.
    """

    model_config = ConfigDict(frozen=True)

    fault_id: str
    seed_id: str
    subject_language: SubjectLanguage
    kind: FaultKind
    fault_line: int = Field(ge=1)
    original_line: int = Field(ge=1)
    quartile: Quartile
    before_snippet: str
    after_snippet: str
    rng_seed: int
    faulty_source: str
    killed: Optional[bool] = None


class FaultyProgram(BaseModel):
    model_config = ConfigDict(frozen=True)

    fault: InjectedFault
    seed: SeedProgram

    @property
    def source_text(self) -> str:
        return self.fault.faulty_source

    @property
    def subject_language(self) -> SubjectLanguage:
        return self.seed.subject_language
