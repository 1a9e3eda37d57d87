"""
Mutation operator - abstract base class for all semantic-preserving mutations.

Operators edit a MutationState in place and report how many applications they managed.
"""

from abc import ABC, abstractmethod
from typing import FrozenSet

import numpy as np

from source_model.models import Quartile, SubjectLanguage
from source_model.utils import quartile_of
from spm.content import ContentProvider
from spm.models import SpmKind
from spm.state import MutationState


class SpmOperator(ABC):
    """
    Abstract mutation operator.
    """

    languages: FrozenSet[SubjectLanguage] = frozenset(SubjectLanguage)

    @property
    @abstractmethod
    def kind(self) -> SpmKind:
        ...

    @abstractmethod
    def apply(
        self,
        state: MutationState,
        strength: int,
        quartile: Quartile,
        provider: ContentProvider,
        rng: np.random.Generator,
    ) -> int:
        """
        Applies up to `strength` mutations targeting `quartile` and returns the effective
        strength. Raises NoApplicableTargetError when the quartile offers nothing to mutate.
        """
        ...

    def supports(self, language: SubjectLanguage) -> bool:
        return language in self.languages


def in_quartile(line: int, state: MutationState, quartile: Quartile) -> bool:
    return quartile_of(line, state.line_count) == quartile
