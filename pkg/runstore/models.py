"""
This module contains the run manifest, the record stream registry and the SQLAlchemy ORM
models of the key index.
"""

from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple, Type

from pydantic import BaseModel, ConfigDict
from sqlalchemy import Column, Float, Integer, String, UniqueConstraint
from sqlalchemy.orm import declarative_base

from corpus.models import SeedProgram
from faults.models import InjectedFault
from filtering.verdicts import FilterVerdict
from gateway.models import FaultLocTask, ModelAnswer
from metrics.models import ScoreRecord
from spm.models import MutantProgram

Base = declarative_base()


class StreamName(str, Enum):
    seeds = "seeds"
    faults = "faults"
    mutants = "mutants"
    tasks = "tasks"
    answers = "answers"
    verdicts = "verdicts"
    scores = "scores"


# schema and idempotence key per stream
StreamSpec = Tuple[Type[BaseModel], Callable[[Any], str]]
STREAMS: Dict[StreamName, StreamSpec] = {
    StreamName.seeds: (SeedProgram, lambda r: r.seed_id),
    StreamName.faults: (InjectedFault, lambda r: r.fault_id),
    StreamName.mutants: (MutantProgram, lambda r: r.mutant_id),
    StreamName.tasks: (FaultLocTask, lambda r: r.task_id),
    StreamName.answers: (ModelAnswer, lambda r: f"{r.task_id}|{r.model_name}"),
    StreamName.verdicts: (FilterVerdict, lambda r: r.task_id),
    StreamName.scores: (ScoreRecord, lambda r: f"{r.task_id}|{r.model_name}"),
}


class RunManifest(BaseModel):
    model_config = ConfigDict(frozen=True)

    run_id: str
    created_at: str
    config: Dict[str, Any]
    config_hash: str
    rng_seed: int
    corpus_hash: Optional[str] = None
    tool_version: str


# Define the record key and stream state tables
class RecordKey(Base):
    __tablename__ = "record_keys"
    __table_args__ = (UniqueConstraint("stream", "record_key"),)
    id = Column(Integer, primary_key=True, autoincrement=True)
    stream = Column(String, nullable=False)
    record_key = Column(String, nullable=False)
    record_id = Column(String, nullable=False)
    line_no = Column(Integer, nullable=False)


class StreamState(Base):
    __tablename__ = "stream_state"
    stream = Column(String, primary_key=True)
    line_count = Column(Integer, nullable=False)


# Single row guarding the run directory against concurrent writers
class WriterLease(Base):
    __tablename__ = "writer_lease"
    id = Column(Integer, primary_key=True)
    owner = Column(String, nullable=False)
    pid = Column(Integer, nullable=False)
    acquired_at = Column(Float, nullable=False)
