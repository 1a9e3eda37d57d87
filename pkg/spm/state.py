"""
This module contains the working state of a mutation: the current text, the cumulative line
ledger and the tracked fault line, checked after every edit batch.
"""

import logging
from typing import Optional, Sequence

from source_model.editing import apply_edits
from source_model.errors import LineDeletedError, ParseFailureError, SourceModelError
from source_model.ledger import LineLedger
from source_model.models import Edit, EditKind, SubjectLanguage, SyntaxIndex
from source_model.parser import parse_source
from source_model.utils import LineMap, line_count
from spm.errors import SpmIntegrityError

logger = logging.getLogger(__name__)


def replace_on_line(text: str, edits: Sequence[Edit]) -> str:
    for edit in sorted(edits, key=lambda e: e.start_col, reverse=True):
        text = text[: edit.start_col] + edit.text + text[edit.end_col :]
    return text


class MutationState:
    def __init__(
        self,
        source_text: str,
        language: SubjectLanguage,
        tracked_line: int,
        ledger: Optional[LineLedger] = None,
    ) -> None:
        self.source_text = source_text
        self.language = language
        self.tracked_line = tracked_line
        self.ledger = ledger or LineLedger.identity(line_count(source_text))
        self.fault_line_text = LineMap(source_text).line_text(tracked_line)

    @property
    def line_count(self) -> int:
        return self.ledger.new_line_count

    def copy(self) -> "MutationState":
        return MutationState(self.source_text, self.language, self.tracked_line, self.ledger)

    def adopt(self, other: "MutationState") -> None:
        self.source_text = other.source_text
        self.tracked_line = other.tracked_line
        self.fault_line_text = other.fault_line_text
        self.ledger = other.ledger

    def index(self) -> SyntaxIndex:
        try:
            return parse_source(self.source_text, self.language)
        except ParseFailureError as e:
            raise SpmIntegrityError(f"Mutated program no longer parses: {e.message}")

    def apply(self, edits: Sequence[Edit]) -> LineLedger:
        """
        Applies one batch and moves the tracked fault line with it. The fault line may only
        change through replacements on that same line. Returns the ledger of this batch alone.
        """
        if not edits:
            return LineLedger.identity(self.line_count)
        try:
            new_text, step = apply_edits(self.source_text, edits)
        except SourceModelError as e:
            raise SpmIntegrityError(f"Edit batch rejected: {e.message}")
        on_fault_line = [
            e for e in edits if e.kind == EditKind.replace_span and e.line == self.tracked_line
        ]
        expected = replace_on_line(self.fault_line_text, on_fault_line)
        try:
            tracked = step.map_line(self.tracked_line)
        except LineDeletedError:
            raise SpmIntegrityError(f"Fault line {self.tracked_line} was deleted.")
        actual = LineMap(new_text).line_text(tracked)
        if actual != expected:
            raise SpmIntegrityError(
                f"Fault line drifted: expected {expected.strip()!r} at line {tracked}, "
                f"found {actual.strip()!r}."
            )
        logger.debug(f"Fault line {self.tracked_line} -> {tracked} after {len(edits)} edits")
        self.source_text = new_text
        self.tracked_line = tracked
        self.fault_line_text = actual
        self.ledger = self.ledger.compose(step)
        return step
