"""
This module reorders method declarations inside a class by random transpositions.
"""

import logging
from typing import List, Tuple

import numpy as np

from source_model.models import Edit, FunctionSpan, Quartile, SubjectLanguage
from spm.content import ContentProvider
from spm.errors import NoApplicableTargetError
from spm.models import SpmKind
from spm.operators.base import SpmOperator, in_quartile
from spm.state import MutationState

logger = logging.getLogger(__name__)


def transpose(state: MutationState, first: FunctionSpan, second: FunctionSpan) -> MutationState:
    """
    Returns a copy of `state` with two non-overlapping methods swapped. The gap between them
    stays where it is.
    """
    a, b = sorted((first, second), key=lambda f: f.start_line)
    swapped = state.copy()
    step = swapped.apply([Edit.move(b.start_line, b.end_line, a.start_line)])
    # movable methods never share their last line with the class closing brace
    dest = step.map_line(b.end_line + 1)
    swapped.apply([Edit.move(step.map_line(a.start_line), step.map_line(a.end_line), dest)])
    return swapped


class FunctionShuffleOperator(SpmOperator):
    """
    Applies `strength` transpositions of methods within the same top-level class. A
    transposition that would give back the starting order is replaced by another one, or
    skipped when none is left.
    """

    languages = frozenset({SubjectLanguage.JAVA})

    @property
    def kind(self) -> SpmKind:
        return SpmKind.function_shuffle

    def apply(
        self,
        state: MutationState,
        strength: int,
        quartile: Quartile,
        provider: ContentProvider,
        rng: np.random.Generator,
    ) -> int:
        starting_text = state.source_text
        applied = 0
        for step in range(strength):
            pairs = self._pairs(state, quartile)
            if not pairs:
                if step == 0:
                    raise NoApplicableTargetError(self.kind.value, quartile.value)
                break
            for i in rng.permutation(len(pairs)):
                first, second = pairs[int(i)]
                candidate = transpose(state, first, second)
                if candidate.source_text in (starting_text, state.source_text):
                    continue
                logger.debug(f"Swapped methods '{first.name}' and '{second.name}'")
                state.adopt(candidate)
                applied += 1
                break
        return applied

    def _pairs(
        self, state: MutationState, quartile: Quartile
    ) -> List[Tuple[FunctionSpan, FunctionSpan]]:
        movable = [f for f in state.index().function_spans if f.movable]
        pairs = []
        for first in movable:
            if not in_quartile(first.start_line, state, quartile):
                continue
            for second in movable:
                if second is not first and second.class_name == first.class_name:
                    pairs.append((first, second))
        return pairs
