"""
This module renames identifiers to names that hide what they hold.
"""

import logging
from typing import AbstractSet, List, Set

import numpy as np

from source_model.models import Edit, IdentifierEntry, Quartile, Span
from spm.content import ContentProvider
from spm.errors import NoApplicableTargetError, RenameCollisionError
from spm.models import SpmKind
from spm.operators.base import SpmOperator, in_quartile
from spm.state import MutationState

logger = logging.getLogger(__name__)


def entry_spans(entry: IdentifierEntry) -> List[Span]:
    return sorted(
        {entry.declaration, *entry.occurrences}, key=lambda s: (s.line, s.start_col)
    )


class MisleadingVariableNamesOperator(SpmOperator):
    """
    Renames `strength` distinct identifiers declared in the quartile, every occurrence at once.
    Identifiers that appear on the fault line are never chosen.
    """

    @property
    def kind(self) -> SpmKind:
        return SpmKind.misleading_variable_names

    def apply(
        self,
        state: MutationState,
        strength: int,
        quartile: Quartile,
        provider: ContentProvider,
        rng: np.random.Generator,
    ) -> int:
        index = state.index()
        entries = [
            e
            for e in index.identifier_table
            if in_quartile(e.declaration.line, state, quartile)
            and all(span.line != state.tracked_line for span in entry_spans(e))
        ]
        if not entries:
            raise NoApplicableTargetError(self.kind.value, quartile.value)

        picked = [entries[int(i)] for i in rng.permutation(len(entries))[:strength]]
        taken: Set[str] = set()
        edits: List[Edit] = []
        for entry in picked:
            new_name = self._new_name(entry, provider, state, index.reserved_names, taken, rng)
            taken.add(new_name)
            edits.extend(Edit.replace(span, new_name) for span in entry_spans(entry))
            logger.debug(f"Renaming {entry.kind} '{entry.name}' -> '{new_name}' ({entry.scope_id})")
        state.apply(edits)
        return len(picked)

    def _new_name(
        self,
        entry: IdentifierEntry,
        provider: ContentProvider,
        state: MutationState,
        reserved: AbstractSet[str],
        taken: AbstractSet[str],
        rng: np.random.Generator,
    ) -> str:
        for candidate in provider.rename_candidates(entry.name, entry.kind, state.language, rng):
            if candidate not in reserved and candidate not in taken:
                return candidate
        raise RenameCollisionError(f"No collision-free name left for '{entry.name}'.")
