import json
import os
from pathlib import Path
from typing import Any, Dict, List

import pytest

from corpus.errors import CorpusError, MalformedRecordError
from corpus.loader import corpus_hash, ensure_unique_ids, filter_seeds, load_corpus
from corpus.models import RejectReason
from source_model.models import SubjectLanguage

RESOURCES = os.path.join(os.path.dirname(__file__), "..", "resources", "demo_corpus")


def _program(lines: int) -> str:
    body = "".join(f"    total = total + {i}\n" for i in range(lines))
    return f"def run():\n    total = 0\n{body}    return total\n"


def _write(path: Any, records: List[Dict[str, Any]]) -> str:
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return str(path)


def _record(seed_id: str, code: str, **extra: Any) -> Dict[str, Any]:
    return {"id": seed_id, "language": "PY", "spec": "Sum numbers.", "code": code, **extra}


def test_load_corpus(tmp_path: Path) -> None:
    path = _write(
        tmp_path / "seeds.jsonl",
        [
            _record("a", _program(60), runnable=True, stdin="1\n"),
            _record("b", _program(5)),
        ],
    )
    seeds = load_corpus(path, SubjectLanguage.PY)
    assert [s.seed_id for s in seeds] == ["a", "b"]
    assert seeds[0].loc == 63
    assert seeds[0].runnable
    assert seeds[0].stdin == "1\n"
    assert not seeds[1].runnable
    assert seeds[0].token_estimate > 0


def test_load_corpus_skips_unparseable(tmp_path: Path) -> None:
    path = _write(
        tmp_path / "seeds.jsonl",
        [_record("good", _program(3)), _record("bad", "def broken(:\n")],
    )
    seeds = load_corpus(path, SubjectLanguage.PY)
    assert [s.seed_id for s in seeds] == ["good"]


@pytest.mark.parametrize(
    "record",
    [
        {"id": "x", "language": "PY", "spec": "s"},
        {"id": "x", "language": "PY", "spec": "", "code": "x = 1\n"},
        {"id": "x", "language": "JAVA", "spec": "s", "code": "x = 1\n"},
        {"id": "x", "language": "PY", "spec": "s", "code": "x = 1\n", "runnable": "yes"},
    ],
    ids=["missing_code", "empty_spec", "wrong_language", "runnable_not_bool"],
)
def test_load_corpus_malformed(record: Dict[str, Any], tmp_path: Path) -> None:
    path = _write(tmp_path / "seeds.jsonl", [record])
    with pytest.raises(MalformedRecordError) as e:
        load_corpus(path, SubjectLanguage.PY)
    assert e.value.record_index == 0


@pytest.mark.parametrize(
    "second_code", [_program(3), "def broken(:\n"], ids=["valid", "unparseable"]
)
def test_load_corpus_duplicate_ids(second_code: str, tmp_path: Path) -> None:
    path = _write(
        tmp_path / "seeds.jsonl",
        [_record("a", _program(3)), _record("b", _program(4)), _record("a", second_code)],
    )
    with pytest.raises(CorpusError) as e:
        load_corpus(path, SubjectLanguage.PY)
    assert isinstance(e.value, MalformedRecordError)
    assert e.value.record_index == 2
    assert "record 0" in e.value.message


def test_ids_unique_across_languages(tmp_path: Path) -> None:
    python_path = _write(tmp_path / "py.jsonl", [_record("a", _program(3))])
    python = load_corpus(python_path, SubjectLanguage.PY)
    java_record = _record("a", "class A { void f() { int x = 1; } }")
    java_record["language"] = "JAVA"
    java = load_corpus(_write(tmp_path / "java.jsonl", [java_record]), SubjectLanguage.JAVA)
    ensure_unique_ids(python)
    with pytest.raises(CorpusError, match="used by both"):
        ensure_unique_ids(python + java)


def test_load_corpus_invalid_json(tmp_path: Path) -> None:
    path = tmp_path / "seeds.jsonl"
    path.write_text('{"id": "x"\n', encoding="utf-8")
    with pytest.raises(MalformedRecordError):
        load_corpus(str(path), SubjectLanguage.PY)


def test_load_corpus_missing_file(tmp_path: Path) -> None:
    with pytest.raises(CorpusError):
        load_corpus(str(tmp_path / "absent.jsonl"), SubjectLanguage.PY)


def test_filter_seeds(tmp_path: Path) -> None:
    path = _write(
        tmp_path / "seeds.jsonl",
        [
            _record("small", _program(5)),
            _record("medium", _program(60)),
            _record("large", _program(400)),
        ],
    )
    seeds = load_corpus(path, SubjectLanguage.PY)
    retained, rejected = filter_seeds(seeds, min_loc=50, max_tokens=2000)
    assert [s.seed_id for s in retained] == ["medium"]
    assert {(r.seed.seed_id, r.reason) for r in rejected} == {
        ("small", RejectReason.too_small),
        ("large", RejectReason.too_large),
    }
    with pytest.raises(CorpusError):
        filter_seeds(seeds, min_loc=0, max_tokens=10)


def test_corpus_hash_ignores_order(tmp_path: Path) -> None:
    path = _write(
        tmp_path / "seeds.jsonl",
        [_record("a", _program(3)), _record("b", _program(4))],
    )
    seeds = load_corpus(path, SubjectLanguage.PY)
    assert corpus_hash(seeds) == corpus_hash(list(reversed(seeds)))
    assert corpus_hash(seeds) != corpus_hash(seeds[:1])


@pytest.mark.parametrize(
    "file_name, language",
    [("python.jsonl", SubjectLanguage.PY), ("java.jsonl", SubjectLanguage.JAVA)],
    ids=["python", "java"],
)
def test_demo_corpus_loads(file_name: str, language: SubjectLanguage) -> None:
    seeds = load_corpus(os.path.join(RESOURCES, file_name), language)
    retained, _ = filter_seeds(seeds, min_loc=50, max_tokens=100_000)
    assert len(retained) == 15
    assert all(s.runnable for s in retained)
