"""
This module contains the custom exceptions for the corpus module.
"""

from typing import Optional


class CorpusError(Exception):
    """
    Base class for all corpus exceptions.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class MalformedRecordError(CorpusError):
    """
    Exception raised when a seed record is missing a field or carries an empty value.
    """

    def __init__(self, message: str, record_index: Optional[int] = None) -> None:
        prefix = f"Record {record_index}: " if record_index is not None else ""
        super().__init__(f"{prefix}{message}")
        self.record_index = record_index
