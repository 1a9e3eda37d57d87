"""
This module contains the custom exceptions for the source model module.
"""

from typing import Optional


class SourceModelError(Exception):
    """
    Base class for all source model exceptions.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class ParseFailureError(SourceModelError):
    """
    Exception raised when a frontend rejects a program.
    """

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class OverlappingEditsError(SourceModelError):
    """
    Exception raised when two edits of the same batch touch the same text.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class SpanOutOfRangeError(SourceModelError):
    """
    Exception raised when an edit targets a line or column outside the source.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class LineOutOfRangeError(SourceModelError):
    """
    Exception raised when a line number falls outside [1, line_count].
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class LineDeletedError(SourceModelError):
    """
    Exception raised when a ledger is asked for a line that no longer exists.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
