"""
This module contains the content providers that supply misleading names, comment sentences and
dead statements to the mutation operators.
"""

import keyword
import logging
import re
from abc import ABC, abstractmethod
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from source_model.frontends.java_frontend import JAVA_KEYWORDS
from source_model.models import SubjectLanguage
from spm.models import ContentMode
from spm.snippets import DeadStatement, parse_dead_statement

logger = logging.getLogger(__name__)

IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]{0,39}$")
MAX_COMMENT_LENGTH = 100

VARIABLE_NAMES = (
    "index",
    "final_result",
    "total",
    "counter",
    "temp",
    "flag",
    "node",
    "value",
    "buffer",
    "offset",
    "limit",
    "cursor",
    "matrix",
    "max_value",
    "min_value",
    "is_sorted",
    "average",
    "checksum",
    "visited",
    "queue",
    "parent",
    "depth",
    "weight",
    "left_sum",
    "right_sum",
    "prefix",
    "suffix",
    "pivot",
    "carry",
    "remainder",
    "row_count",
    "col_count",
    "hash_code",
    "threshold",
    "step_size",
    "last_seen",
    "first_match",
    "unique_items",
    "output_list",
    "retry_count",
)
FUNCTION_NAMES = (
    "how_many_queens",
    "validate_input",
    "compute_average",
    "reset_cache",
    "parse_header",
    "sort_descending",
    "count_vowels",
    "find_minimum",
    "merge_lists",
    "print_banner",
    "load_settings",
    "check_permissions",
    "normalize_path",
    "encode_message",
    "flatten_tree",
    "shuffle_deck",
    "compute_checksum",
    "read_config",
    "update_scores",
    "reverse_words",
)
DEAD_CODE_NAMES = (
    "unused_total",
    "cached_value",
    "debug_flag",
    "retry_limit",
    "scratch_buffer",
    "legacy_offset",
    "temp_counter",
    "fallback_index",
    "spare_capacity",
    "old_checksum",
    "pending_count",
    "backup_value",
    "trace_level",
    "warmup_steps",
    "stale_marker",
    "reserved_slot",
)
COMMENT_SENTENCES = (
    "Sort the values in descending order before returning them.",
    "This loop computes the factorial of n.",
    "Initialize the cache with default values.",
    "Return early if the input list is empty.",
    "Convert the temperature from Celsius to Fahrenheit.",
    "Check whether the queen placement is valid.",
    "Accumulate the running total of negative values.",
    "Reverse the string in place.",
    "Validate that the matrix is symmetric.",
    "Increment the counter for each vowel found.",
    "Remove duplicate entries while preserving order.",
    "Compute the greatest common divisor of both numbers.",
    "Skip the header row of the input file.",
    "Normalize the vector to unit length.",
    "Merge the two sorted halves into the result.",
    "Retry the request until the server responds.",
    "Encode the message using a Caesar shift of three.",
    "Look up the user's permissions in the database.",
    "Round the result to two decimal places.",
    "Balance the tree after every insertion.",
    "Cache the last computed value for reuse.",
    "Traverse the graph in breadth-first order.",
    "Swap the first and last elements of the array.",
    "Parse the date string into year, month and day.",
)


def camel_case(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(part[:1].upper() + part[1:] for part in rest)


def styled(name: str, language: SubjectLanguage) -> str:
    return name if language == SubjectLanguage.PY else camel_case(name)


def is_valid_identifier(name: str, language: SubjectLanguage) -> bool:
    if not IDENTIFIER.match(name):
        return False
    if language == SubjectLanguage.PY:
        return not keyword.iskeyword(name) and not keyword.issoftkeyword(name)
    return name not in JAVA_KEYWORDS


def sanitize_comment(text: str) -> Optional[str]:
    """
    Returns a comment body safe to place after a line-comment marker, or None when nothing
    usable remains.
    """
    cleaned = text.replace("\r", " ").replace("\n", " ").replace("\\", " ")
    cleaned = cleaned.replace("*/", " ").replace("/*", " ")
    cleaned = cleaned.strip().lstrip("#/").strip()
    cleaned = re.sub(r"\s+", " ", cleaned)
    if not cleaned or len(cleaned) > MAX_COMMENT_LENGTH:
        return None
    return cleaned


def _shuffled(pool: Tuple[str, ...], rng: np.random.Generator) -> List[str]:
    return [pool[int(i)] for i in rng.permutation(len(pool))]


class ContentProvider(ABC):
    """
    Supplies candidate content in preference order. Callers validate candidates against the
    program and move on to the next one on collision.
    """

    mode: ContentMode

    @abstractmethod
    def rename_candidates(
        self, original: str, kind: str, language: SubjectLanguage, rng: np.random.Generator
    ) -> List[str]:
        pass

    @abstractmethod
    def dead_code_statements(
        self, language: SubjectLanguage, source_text: str, rng: np.random.Generator
    ) -> List[DeadStatement]:
        pass

    @abstractmethod
    def comment_sentences(
        self, language: SubjectLanguage, source_text: str, rng: np.random.Generator
    ) -> List[str]:
        pass


class TemplateContentProvider(ContentProvider):
    """
    Curated pools, ordered by the seeded generator.
    """

    mode = ContentMode.template

    def rename_candidates(
        self, original: str, kind: str, language: SubjectLanguage, rng: np.random.Generator
    ) -> List[str]:
        pool = FUNCTION_NAMES if kind == "function" else VARIABLE_NAMES
        names = [styled(name, language) for name in _shuffled(pool, rng)]
        names += [f"{name}2" for name in names]
        return [name for name in names if name != original]

    def dead_code_statements(
        self, language: SubjectLanguage, source_text: str, rng: np.random.Generator
    ) -> List[DeadStatement]:
        names = [styled(name, language) for name in _shuffled(DEAD_CODE_NAMES, rng)]
        names += [f"{name}{suffix}" for suffix in range(2, 6) for name in names]
        values = rng.integers(100, size=len(names))
        return [DeadStatement(name, str(int(value))) for name, value in zip(names, values)]

    def comment_sentences(
        self, language: SubjectLanguage, source_text: str, rng: np.random.Generator
    ) -> List[str]:
        return _shuffled(COMMENT_SENTENCES, rng)


NAME_PROMPT = (
    "Suggest {count} misleading but plausible {language} identifier names that could replace "
    "`{original}` while hiding what it really holds. Reply with one name per line and nothing "
    "else."
)
DEAD_CODE_PROMPT = (
    "Here is a {language} program:\n```\n{source}\n```\n"
    "Write {count} single-line {language} statements that would look natural in this program "
    "but have no side effects. Each one must declare a single new variable {rule}. Reply with "
    "one statement per line and nothing else."
)
DEAD_CODE_RULES = {
    SubjectLanguage.PY: "computed from literals, existing variables and builtins such as len",
    SubjectLanguage.JAVA: "of type int, long, double, boolean or String, set from literals only",
}
COMMENT_PROMPT = (
    "Here is a {language} program:\n```\n{source}\n```\n"
    "Write {count} short code comments that sound coherent for this program but describe "
    "behaviour it does not have. Reply with one comment per line, without comment markers."
)
LANGUAGE_NAMES = {SubjectLanguage.PY: "Python", SubjectLanguage.JAVA: "Java"}


def _reply_lines(reply: str) -> List[str]:
    lines = []
    for raw in reply.splitlines():
        line = re.sub(r"^\s*(?:[-*•]|\d+[.)])\s*", "", raw).strip().strip("`").strip()
        if line:
            lines.append(line)
    return lines


class ModelContentProvider(ContentProvider):
    """
    Asks a model for content and validates every item. Invalid or missing items are filled
    from the template pools, so callers always receive full candidate lists.
    """

    mode = ContentMode.model_generated

    def __init__(self, ask: Callable[[str], str], model_name: str, count: int = 10) -> None:
        self._ask = ask
        self.model_name = model_name
        self._count = count
        self._fallback = TemplateContentProvider()
        self._cache: Dict[Tuple[str, str, str], List[str]] = {}

    def _query(self, key: Tuple[str, str, str], prompt: str) -> List[str]:
        if key not in self._cache:
            try:
                self._cache[key] = _reply_lines(self._ask(prompt))
            except Exception as e:
                logger.warning(f"Content model '{self.model_name}' failed, using templates: {e}")
                self._cache[key] = []
        return self._cache[key]

    def rename_candidates(
        self, original: str, kind: str, language: SubjectLanguage, rng: np.random.Generator
    ) -> List[str]:
        prompt = NAME_PROMPT.format(
            count=self._count, language=LANGUAGE_NAMES[language], original=original
        )
        proposed = self._query(("rename", original, language.value), prompt)
        valid = [n for n in proposed if is_valid_identifier(n, language) and n != original]
        if len(valid) < len(proposed):
            logger.info(f"Discarded {len(proposed) - len(valid)} invalid names for '{original}'")
        return valid + self._fallback.rename_candidates(original, kind, language, rng)

    def dead_code_statements(
        self, language: SubjectLanguage, source_text: str, rng: np.random.Generator
    ) -> List[DeadStatement]:
        prompt = DEAD_CODE_PROMPT.format(
            count=self._count,
            language=LANGUAGE_NAMES[language],
            source=source_text,
            rule=DEAD_CODE_RULES[language],
        )
        proposed = self._query(("dead", source_text, language.value), prompt)
        valid = []
        for line in proposed:
            statement = parse_dead_statement(line, language, source_text)
            if statement is not None and is_valid_identifier(statement.name, language):
                valid.append(statement)
        if len(valid) < len(proposed):
            logger.info(f"Discarded {len(proposed) - len(valid)} invalid dead statements")
        return valid + self._fallback.dead_code_statements(language, source_text, rng)

    def comment_sentences(
        self, language: SubjectLanguage, source_text: str, rng: np.random.Generator
    ) -> List[str]:
        prompt = COMMENT_PROMPT.format(
            count=self._count, language=LANGUAGE_NAMES[language], source=source_text
        )
        proposed = self._query(("comment", source_text, language.value), prompt)
        valid = [c for c in (sanitize_comment(p) for p in proposed) if c is not None]
        return valid + self._fallback.comment_sentences(language, source_text, rng)
