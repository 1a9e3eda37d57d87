"""
This module selects the frontend for a subject language and caches parsed indexes.
"""

import logging
from functools import lru_cache
from typing import TYPE_CHECKING

from source_model.frontends.java_frontend import parse_java
from source_model.frontends.python_frontend import parse_python
from source_model.models import SubjectLanguage, SyntaxIndex

if TYPE_CHECKING:
    from corpus.models import SeedProgram

logger = logging.getLogger(__name__)


@lru_cache(maxsize=512)
def parse_source(source_text: str, language: SubjectLanguage) -> SyntaxIndex:
    """
    Parses source text with the frontend of its subject language.
    Raises ParseFailureError when the frontend rejects the text.
    """
    if language == SubjectLanguage.PY:
        index = parse_python(source_text)
    else:
        index = parse_java(source_text)
    logger.debug(
        f"Parsed {language.value} source: {index.line_count} lines, "
        f"{len(index.statement_boundaries)} boundaries"
    )
    return index


def parse(program: "SeedProgram") -> SyntaxIndex:
    return parse_source(program.source_text, program.subject_language)
