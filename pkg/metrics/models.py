"""
This module contains score records and the aggregate cells and tables built from them.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict

from faults.models import FaultKind
from gateway.models import Phase
from source_model.models import Quartile, SubjectLanguage

ABSENT = "absent"


class ScoreRecord(BaseModel):
    """
    Judgment of one answered task. Strength and quartile are shared by every step of a plan.
    """

    model_config = ConfigDict(frozen=True)

    task_id: str
    model_name: str
    model_category: Optional[str] = None
    phase: Phase
    correct: bool
    parsed: bool
    within_tolerance: bool
    predicted_line: Optional[int] = None
    ground_truth_line: int
    seed_id: str
    fault_id: str
    mutant_id: Optional[str] = None
    subject_language: SubjectLanguage
    fault_kind: FaultKind
    fault_quartile: Quartile
    killed: Optional[bool] = None
    plan: Optional[str] = None
    strength: Optional[int] = None
    spm_quartile: Optional[Quartile] = None
    effective_strengths: Tuple[int, ...] = ()


@dataclass(frozen=True)
class Cell:
    """
    One aggregate cell. `hits` counts whatever the table measures (correct localizations, or
    failures for robustness); `total` is the denominator, 0 marks the cell absent.
    """

    key: Tuple[str, ...]
    hits: int
    total: int
    unparsed: int = 0
    within_tolerance: int = 0

    @property
    def rate(self) -> Optional[float]:
        if self.total == 0:
            return None
        return 100.0 * self.hits / self.total

    @property
    def tolerance_rate(self) -> Optional[float]:
        if self.total == 0:
            return None
        return 100.0 * self.within_tolerance / self.total


@dataclass(frozen=True)
class Table:
    name: str
    axes: Tuple[str, ...]
    cells: Tuple[Cell, ...]
    hit_label: str = "correct"
    rate_label: str = "accuracy"

    def cell(self, *key: str) -> Optional[Cell]:
        for cell in self.cells:
            if cell.key == tuple(key):
                return cell
        return None


@dataclass(frozen=True)
class StrengthCurve:
    model_name: str
    plan: str
    subject_language: str
    points: Tuple[Cell, ...]
    slope: float
