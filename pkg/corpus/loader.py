"""
This module loads seed records from line-delimited JSON files and filters them by size.
"""

import json
import logging
import os
from typing import Dict, List, Sequence, Tuple

from corpus.errors import CorpusError, MalformedRecordError
from corpus.models import RejectedSeed, RejectReason, SeedProgram
from source_model.errors import ParseFailureError
from source_model.models import SubjectLanguage
from source_model.parser import parse_source
from source_model.utils import content_hash, count_loc, estimate_tokens

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("id", "language", "spec", "code")


def _read_records(path: str) -> List[Tuple[int, Dict[str, object]]]:
    if not os.path.isfile(path):
        raise CorpusError(f"Seed file '{path}' does not exist.")
    records = []
    with open(path, encoding="utf-8", newline="") as f:
        for index, raw in enumerate(f.read().split("\n")):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as e:
                raise MalformedRecordError(f"invalid JSON ({e.msg})", index)
            if not isinstance(record, dict):
                raise MalformedRecordError("record is not an object", index)
            records.append((index, record))
    return records


def _validate_record(index: int, record: Dict[str, object]) -> None:
    for name in REQUIRED_FIELDS:
        if name not in record:
            raise MalformedRecordError(f"missing field '{name}'", index)
        value = record[name]
        if not isinstance(value, str) or not value.strip():
            raise MalformedRecordError(f"field '{name}' must be a non-empty string", index)
    if "stdin" in record and not isinstance(record["stdin"], str):
        raise MalformedRecordError("field 'stdin' must be a string", index)
    if "runnable" in record and not isinstance(record["runnable"], bool):
        raise MalformedRecordError("field 'runnable' must be a boolean", index)


def load_corpus(
    path: str, subject_language: SubjectLanguage, chars_per_token: int = 4
) -> List[SeedProgram]:
    """
    Loads every record of a seed file. Records the frontend rejects are logged and skipped;
    structurally invalid records and repeated seed ids abort the load.
    """
    seeds: List[SeedProgram] = []
    # seed id -> index of the record that introduced it
    seen: Dict[str, int] = {}
    for index, record in _read_records(path):
        _validate_record(index, record)
        seed_id = str(record["id"])
        if seed_id in seen:
            raise MalformedRecordError(
                f"seed id '{seed_id}' already used by record {seen[seed_id]}", index
            )
        seen[seed_id] = index
        language = str(record["language"])
        if language != subject_language.value:
            raise MalformedRecordError(
                f"language '{language}' does not match '{subject_language.value}'", index
            )
        source_text = str(record["code"])
        spec_text = str(record["spec"])
        try:
            parse_source(source_text, subject_language)
        except ParseFailureError as e:
            logger.warning(f"Skipping seed '{seed_id}' (record {index}): {e.message}")
            continue
        seeds.append(
            SeedProgram(
                seed_id=seed_id,
                subject_language=subject_language,
                spec_text=spec_text,
                source_text=source_text,
                loc=count_loc(source_text),
                token_estimate=estimate_tokens(spec_text + source_text, chars_per_token),
                runnable=bool(record.get("runnable", False)),
                stdin=str(record.get("stdin", "")),
            )
        )
    logger.info(f"Loaded {len(seeds)} {subject_language.value} seeds from '{path}'")
    return seeds


def ensure_unique_ids(seeds: Sequence[SeedProgram]) -> None:
    """
    Raises CorpusError when seeds loaded from different files share an id.
    """
    languages: Dict[str, str] = {}
    for seed in seeds:
        other = languages.setdefault(seed.seed_id, seed.subject_language.value)
        if other != seed.subject_language.value:
            raise CorpusError(
                f"Seed id '{seed.seed_id}' is used by both the {other} "
                f"and the {seed.subject_language.value} corpus."
            )


def filter_seeds(
    seeds: Sequence[SeedProgram], min_loc: int, max_tokens: int
) -> Tuple[List[SeedProgram], List[RejectedSeed]]:
    """
    Splits seeds into those within both size bounds and those rejected, with a reason each.
    """
    if min_loc < 1:
        raise CorpusError(f"min_loc must be at least 1, got {min_loc}.")
    retained: List[SeedProgram] = []
    rejected: List[RejectedSeed] = []
    for seed in seeds:
        if seed.loc < min_loc:
            rejected.append(RejectedSeed(seed=seed, reason=RejectReason.too_small))
        elif seed.token_estimate > max_tokens:
            rejected.append(RejectedSeed(seed=seed, reason=RejectReason.too_large))
        else:
            retained.append(seed)
    logger.info(f"Filtered seeds: {len(retained)} retained, {len(rejected)} rejected")
    return retained, rejected


def corpus_hash(seeds: Sequence[SeedProgram]) -> str:
    return content_hash(*sorted((s.seed_id, content_hash(s.source_text)) for s in seeds))
