"""
This module contains the custom exceptions for the run store module.
"""


class RunStoreError(Exception):
    """
    Base class for all run store exceptions.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class SchemaViolationError(RunStoreError):
    """
    Exception raised when a record does not match its stream's schema.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class DuplicateRecordError(RunStoreError):
    """
    Exception raised when a record's key is already stored in its stream.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class RunLockedError(RunStoreError):
    """
    Exception raised when another live writer holds the run directory.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class ConfigMismatchError(RunStoreError):
    """
    Exception raised when a run directory was created under a different configuration.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class RunIndexError(RunStoreError):
    """
    Base class for failures of the key index database.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class RunIndexConnectionError(RunIndexError):
    """
    Exception raised when the index database cannot be opened.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class RunIndexQueryError(RunIndexError):
    """
    Exception raised when an index query cannot be executed.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class RunIndexInsertionError(RunIndexError):
    """
    Exception raised when keys cannot be written to the index.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
