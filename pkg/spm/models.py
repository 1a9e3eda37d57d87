"""
This module contains the mutation kinds, plans and mutant program records.
"""

from enum import Enum
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from source_model.ledger import LineLedger
from source_model.models import Quartile, SubjectLanguage

MIN_STRENGTH = 1
MAX_STRENGTH = 8


class SpmKind(str, Enum):
    dead_code = "DeadCode"
    misleading_comments = "MisleadingComments"
    misleading_variable_names = "MisleadingVariableNames"
    function_shuffle = "FunctionShuffle"


SPM_LABELS: Dict[SpmKind, str] = {
    SpmKind.dead_code: "d",
    SpmKind.misleading_comments: "c",
    SpmKind.misleading_variable_names: "v",
    SpmKind.function_shuffle: "f",
}


class ContentMode(str, Enum):
    template = "Template"
    model_generated = "ModelGenerated"


class SpmStep(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: SpmKind
    strength: int = Field(ge=MIN_STRENGTH, le=MAX_STRENGTH)
    quartile: Quartile


class AppliedStep(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: SpmKind
    strength: int = Field(ge=MIN_STRENGTH, le=MAX_STRENGTH)
    quartile: Quartile
    effective_strength: int = Field(ge=0)


def plan_label(kinds: Tuple[SpmKind, ...]) -> str:
    """
    Names a plan by composition, innermost kind applied first: (v, c) -> "M_c(M_v)".
    """
    label = ""
    for kind in kinds:
        name = f"M_{SPM_LABELS[kind]}"
        label = f"{name}({label})" if label else name
    return label


class MutantProgram(BaseModel):
    """
    A faulty program after one or more mutation steps. `line_map[i]` is the mutant line of
    faulty line i + 1.
    """

    model_config = ConfigDict(frozen=True)

    mutant_id: str
    fault_id: str
    seed_id: str
    subject_language: SubjectLanguage
    plan: str
    steps: Tuple[AppliedStep, ...]
    content_mode: ContentMode
    rng_seed: int
    source_text: str
    source_hash: str
    tracked_fault_line: int = Field(ge=1)
    fault_line_text: str
    line_map: Tuple[Optional[int], ...]
    line_count: int = Field(ge=0)
    preserved: Optional[bool] = None

    @property
    def ledger(self) -> LineLedger:
        mapping = {line: current for line, current in enumerate(self.line_map, start=1)}
        return LineLedger(mapping, self.line_count)

    @property
    def kinds(self) -> Tuple[SpmKind, ...]:
        return tuple(step.kind for step in self.steps)
