"""
This module replaces or inserts comments with coherent but wrong descriptions of the code.
"""

import itertools
import logging
from typing import Iterator, List

import numpy as np

from source_model.models import CommentSite, Edit, Quartile, SubjectLanguage
from spm.content import COMMENT_SENTENCES, ContentProvider, sanitize_comment
from spm.errors import NoApplicableTargetError
from spm.models import SpmKind
from spm.operators.base import SpmOperator, in_quartile
from spm.state import MutationState

logger = logging.getLogger(__name__)


def render_comment(site: CommentSite, sentence: str) -> str:
    """
    Writes `sentence` in the same comment style as `site`.
    """
    if site.style == "hash":
        return f"# {sentence}"
    if site.style == "line":
        return f"// {sentence}"
    opener = "/**" if site.text.startswith("/**") else "/*"
    return f"{opener} {sentence} */"


def line_comment(language: SubjectLanguage, sentence: str) -> str:
    return f"# {sentence}" if language == SubjectLanguage.PY else f"// {sentence}"


class MisleadingCommentsOperator(SpmOperator):
    """
    Replaces up to `strength` comments in the quartile. A quartile without comments gets
    `strength` new comment lines at its statement boundaries instead. Comments on the fault
    line are left alone.
    """

    @property
    def kind(self) -> SpmKind:
        return SpmKind.misleading_comments

    def apply(
        self,
        state: MutationState,
        strength: int,
        quartile: Quartile,
        provider: ContentProvider,
        rng: np.random.Generator,
    ) -> int:
        index = state.index()
        sentences = self._sentences(provider, state, rng)
        comments = [
            c
            for c in index.comment_spans
            if in_quartile(c.span.line, state, quartile) and c.span.line != state.tracked_line
        ]
        if comments:
            picked = [comments[int(i)] for i in rng.permutation(len(comments))[:strength]]
            edits = [Edit.replace(c.span, render_comment(c, next(sentences))) for c in picked]
            state.apply(edits)
            logger.debug(f"Replaced {len(edits)} of {len(comments)} comments in {quartile.value}")
            return len(edits)

        boundaries = [b for b in index.statement_boundaries if in_quartile(b.line, state, quartile)]
        if not boundaries:
            raise NoApplicableTargetError(self.kind.value, quartile.value)
        inserts: List[Edit] = []
        for _ in range(strength):
            boundary = boundaries[int(rng.integers(len(boundaries)))]
            text = boundary.indent + line_comment(state.language, next(sentences))
            inserts.append(Edit.insert_before(boundary.line, (text,)))
        state.apply(inserts)
        logger.debug(f"Inserted {len(inserts)} comment lines in {quartile.value}")
        return strength

    def _sentences(
        self, provider: ContentProvider, state: MutationState, rng: np.random.Generator
    ) -> Iterator[str]:
        pool = [
            s
            for s in (
                sanitize_comment(c)
                for c in provider.comment_sentences(state.language, state.source_text, rng)
            )
            if s is not None
        ]
        return itertools.cycle(pool or COMMENT_SENTENCES)
