"""
This module contains the run index manager, which keeps the record keys of every stream and the
writer lease in a SQLite database next to the record streams.
"""

import logging
import os
import time
from typing import Iterable, Optional, Set, Tuple

from sqlalchemy import create_engine
from sqlalchemy.exc import IntegrityError, SQLAlchemyError
from sqlalchemy.orm import Session, sessionmaker

from runstore.errors import (
    RunIndexConnectionError,
    RunIndexInsertionError,
    RunIndexQueryError,
    RunLockedError,
)
from runstore.models import Base, RecordKey, StreamState, WriterLease

logger = logging.getLogger(__name__)

LEASE_ROW = 1

# (record_key, record_id, line_no)
KeyRow = Tuple[str, str, int]


def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


class RunIndex:
    def __init__(self, db_path: str) -> None:
        self.db_url = f"sqlite:///{db_path}"
        try:
            self.engine = create_engine(self.db_url)
            Base.metadata.create_all(self.engine)
        except SQLAlchemyError as e:
            raise RunIndexConnectionError(f"Failed to open run index '{db_path}': {e}")
        self.Session = sessionmaker(bind=self.engine)
        self.session: Optional[Session] = None

    def connect(self) -> Session:
        if self.session is None:
            self.session = self.Session()
            logger.debug("Run index session started")
        return self.session

    def disconnect(self) -> None:
        if self.session:
            self.session.close()
            self.session = None
            logger.debug("Run index session closed")
        self.engine.dispose()

    def line_count(self, stream: str) -> Optional[int]:
        session = self.connect()
        try:
            state = session.get(StreamState, stream)
            return None if state is None else int(state.line_count)
        except SQLAlchemyError as e:
            raise RunIndexQueryError(f"Failed to read state of stream '{stream}': {e}")

    def keys(self, stream: str) -> Set[str]:
        session = self.connect()
        try:
            rows = session.query(RecordKey.record_key).filter_by(stream=stream).all()
            return {row[0] for row in rows}
        except SQLAlchemyError as e:
            raise RunIndexQueryError(f"Failed to read keys of stream '{stream}': {e}")

    def add(self, stream: str, rows: Iterable[KeyRow], line_count: int) -> None:
        session = self.connect()
        try:
            for record_key, record_id, line_no in rows:
                session.add(
                    RecordKey(
                        stream=stream, record_key=record_key, record_id=record_id, line_no=line_no
                    )
                )
            session.merge(StreamState(stream=stream, line_count=line_count))
            session.commit()
        except SQLAlchemyError as e:
            session.rollback()
            raise RunIndexInsertionError(f"Failed to index records of stream '{stream}': {e}")

    def rebuild(self, stream: str, rows: Iterable[KeyRow], line_count: int) -> None:
        """
        Replaces a stream's keys with the ones read back from its record file.
        """
        session = self.connect()
        try:
            session.query(RecordKey).filter_by(stream=stream).delete()
            session.commit()
        except SQLAlchemyError as e:
            session.rollback()
            raise RunIndexInsertionError(f"Failed to clear index of stream '{stream}': {e}")
        self.add(stream, rows, line_count)
        logger.info(f"Rebuilt index of stream '{stream}' ({line_count} records)")

    def acquire_lease(self, owner: str) -> None:
        """
        Takes the writer lease. The lease row is created with a plain insert; a lease held by a
        dead process is taken over with an update conditioned on its old owner, so two writers
        racing for the same stale lease cannot both win.
        """
        session = self.connect()
        claim = {"owner": owner, "pid": os.getpid(), "acquired_at": time.time()}
        try:
            session.add(WriterLease(id=LEASE_ROW, **claim))
            session.commit()
            return
        except IntegrityError:
            session.rollback()
        except SQLAlchemyError as e:
            session.rollback()
            raise RunIndexInsertionError(f"Failed to acquire writer lease: {e}")
        try:
            lease = session.get(WriterLease, LEASE_ROW)
            if lease is None:
                session.rollback()
                raise RunLockedError("Writer lease changed hands while acquiring it.")
            holder, pid = str(lease.owner), int(lease.pid)
            if holder != owner:
                if _pid_alive(pid):
                    session.rollback()
                    raise RunLockedError(f"Run is held by writer {holder} (pid {pid}).")
                logger.warning(f"Taking over stale lease of writer {holder} (pid {pid})")
            taken = (
                session.query(WriterLease)
                .filter(WriterLease.id == LEASE_ROW, WriterLease.owner == holder)
                .update(claim, synchronize_session=False)
            )
            session.commit()
        except SQLAlchemyError as e:
            session.rollback()
            raise RunIndexInsertionError(f"Failed to acquire writer lease: {e}")
        if taken != 1:
            raise RunLockedError(f"Stale lease of writer {holder} was taken by another writer.")

    def release_lease(self, owner: str) -> None:
        session = self.connect()
        try:
            lease = session.get(WriterLease, LEASE_ROW)
            if lease is not None and lease.owner == owner:
                session.delete(lease)
                session.commit()
        except SQLAlchemyError as e:
            session.rollback()
            raise RunIndexInsertionError(f"Failed to release writer lease: {e}")
