"""
This module contains the run store: append-only JSONL record streams plus a manifest, with a
SQLite key index that is rebuilt from the streams whenever the two disagree.
"""

import json
import logging
import os
import uuid
from datetime import datetime, timezone
from types import TracebackType
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Type

from pydantic import BaseModel, ValidationError

from runstore.errors import (
    ConfigMismatchError,
    DuplicateRecordError,
    RunStoreError,
    SchemaViolationError,
)
from runstore.index import KeyRow, RunIndex
from runstore.models import STREAMS, RunManifest, StreamName
from source_model.utils import content_hash

logger = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"
MANIFEST_FILE = "manifest.json"
INDEX_FILE = "index.sqlite"


def record_line(record: BaseModel) -> str:
    return json.dumps(record.model_dump(mode="json"), sort_keys=True, ensure_ascii=False)


def record_id(record: BaseModel) -> str:
    return content_hash(record.model_dump(mode="json"))


def truncate_partial_tail(path: str) -> int:
    """
    Cuts a stream file back to its last complete line and returns the number of bytes dropped.
    """
    if not os.path.exists(path):
        return 0
    with open(path, "rb+") as f:
        data = f.read()
        if not data or data.endswith(b"\n"):
            return 0
        keep = data.rfind(b"\n") + 1
        f.truncate(keep)
    return len(data) - keep


class RunStore:
    """
    One run directory. Only one RunStore may write to a directory at a time; records are
    immutable once appended and every stream has an idempotence key.
    """

    def __init__(self, run_dir: str, manifest: RunManifest, owner: Optional[str] = None) -> None:
        self.run_dir = run_dir
        self._manifest = manifest
        self._owner = owner or uuid.uuid4().hex
        self._index = RunIndex(os.path.join(run_dir, INDEX_FILE))
        self._index.acquire_lease(self._owner)
        self._keys: Dict[StreamName, Set[str]] = {}
        self._lines: Dict[StreamName, int] = {}
        try:
            for stream in StreamName:
                self._recover(stream)
        except RunStoreError:
            self.close()
            raise

    @classmethod
    def open(
        cls,
        run_dir: str,
        config: Mapping[str, Any],
        config_hash: str,
        rng_seed: int,
    ) -> "RunStore":
        """
        Opens or creates a run directory. An existing run must carry the same config hash.
        """
        os.makedirs(run_dir, exist_ok=True)
        path = os.path.join(run_dir, MANIFEST_FILE)
        if os.path.exists(path):
            manifest = read_manifest(run_dir)
            if manifest.config_hash != config_hash:
                raise ConfigMismatchError(
                    f"Run '{run_dir}' was created with config {manifest.config_hash}, "
                    f"current config is {config_hash}. Use a new run directory."
                )
            logger.info(f"Resuming run {manifest.run_id} in '{run_dir}'")
        else:
            manifest = RunManifest(
                run_id=content_hash(config_hash, rng_seed, uuid.uuid4().hex, length=12),
                created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
                config=dict(config),
                config_hash=config_hash,
                rng_seed=rng_seed,
                tool_version=TOOL_VERSION,
            )
            _write_manifest(run_dir, manifest)
            logger.info(f"Created run {manifest.run_id} in '{run_dir}'")
        return cls(run_dir, manifest)

    def __enter__(self) -> "RunStore":
        return self

    def __exit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc: Optional[BaseException],
        tb: Optional[TracebackType],
    ) -> None:
        self.close()

    def close(self) -> None:
        self._index.release_lease(self._owner)
        self._index.disconnect()

    @property
    def manifest(self) -> RunManifest:
        return self._manifest

    def set_corpus_hash(self, corpus_hash: str) -> None:
        if self._manifest.corpus_hash == corpus_hash:
            return
        self._manifest = self._manifest.model_copy(update={"corpus_hash": corpus_hash})
        _write_manifest(self.run_dir, self._manifest)

    def path(self, stream: StreamName) -> str:
        return os.path.join(self.run_dir, f"{stream.value}.jsonl")

    def _recover(self, stream: StreamName) -> None:
        dropped = truncate_partial_tail(self.path(stream))
        if dropped:
            logger.warning(f"Dropped {dropped} bytes of a partial record from {stream.value}")
        records = self.read(stream)
        key_of = STREAMS[stream][1]
        if self._index.line_count(stream.value) != len(records):
            rows: List[KeyRow] = [
                (key_of(r), record_id(r), n) for n, r in enumerate(records, start=1)
            ]
            self._index.rebuild(stream.value, rows, len(records))
        self._keys[stream] = self._index.keys(stream.value)
        self._lines[stream] = len(records)

    def _validate(self, stream: StreamName, record: BaseModel) -> BaseModel:
        schema = STREAMS[stream][0]
        if isinstance(record, schema):
            return record
        try:
            return schema.model_validate(record.model_dump())
        except ValidationError as e:
            raise SchemaViolationError(f"Record does not fit stream {stream.value}: {e}")

    def append(self, stream: StreamName, record: BaseModel) -> str:
        """
        Appends one record and returns its content-hash id. A record whose key is already
        stored raises DuplicateRecordError.
        """
        ids = self.append_many(stream, [record], skip_existing=False)
        return ids[0]

    def append_many(
        self, stream: StreamName, records: Sequence[BaseModel], skip_existing: bool = True
    ) -> List[str]:
        """
        Appends records in order. With `skip_existing`, records whose key is already stored are
        left out silently; otherwise they raise DuplicateRecordError.
        """
        key_of = STREAMS[stream][1]
        keys = self._keys[stream]
        lines: List[str] = []
        rows: List[KeyRow] = []
        ids: List[str] = []
        batch_keys: Set[str] = set()
        for record in records:
            record = self._validate(stream, record)
            key = key_of(record)
            if key in keys or key in batch_keys:
                if skip_existing:
                    continue
                raise DuplicateRecordError(f"{stream.value} already holds a record for {key}.")
            rid = record_id(record)
            batch_keys.add(key)
            lines.append(record_line(record))
            rows.append((key, rid, self._lines[stream] + len(lines)))
            ids.append(rid)
        if not lines:
            return ids
        with open(self.path(stream), "a", encoding="utf-8", newline="\n") as f:
            f.write("".join(line + "\n" for line in lines))
            f.flush()
            os.fsync(f.fileno())
        self._lines[stream] += len(lines)
        keys.update(batch_keys)
        self._index.add(stream.value, rows, self._lines[stream])
        logger.debug(f"Appended {len(lines)} records to {stream.value}")
        return ids

    def read(self, stream: StreamName) -> List[Any]:
        path = self.path(stream)
        if not os.path.exists(path):
            return []
        schema = STREAMS[stream][0]
        records = []
        with open(path, encoding="utf-8", newline="") as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(schema.model_validate_json(line))
                except ValidationError as e:
                    raise SchemaViolationError(f"{stream.value}.jsonl line {line_no}: {e}")
        return records

    def keys(self, stream: StreamName) -> Set[str]:
        return set(self._keys[stream])

    def has(self, stream: StreamName, key: str) -> bool:
        return key in self._keys[stream]

    def count(self, stream: StreamName) -> int:
        return self._lines[stream]

    def resume_plan(
        self, declared: Mapping[StreamName, Iterable[str]]
    ) -> Dict[StreamName, Set[str]]:
        """
        Returns, per stream, the declared keys that have no stored record yet.
        """
        return {stream: set(keys) - self._keys[stream] for stream, keys in declared.items()}


def read_manifest(run_dir: str) -> RunManifest:
    path = os.path.join(run_dir, MANIFEST_FILE)
    try:
        with open(path, encoding="utf-8") as f:
            return RunManifest.model_validate_json(f.read())
    except FileNotFoundError:
        raise RunStoreError(f"No run manifest in '{run_dir}'.")
    except ValidationError as e:
        raise SchemaViolationError(f"Manifest of '{run_dir}' is invalid: {e}")


def _write_manifest(run_dir: str, manifest: RunManifest) -> None:
    path = os.path.join(run_dir, MANIFEST_FILE)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(json.dumps(manifest.model_dump(mode="json"), indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)
