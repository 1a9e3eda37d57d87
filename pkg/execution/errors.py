"""
This module contains the custom exceptions for the execution module.
"""


class ExecutionError(Exception):
    """
    Base class for all execution exceptions.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class ExecutionTimeoutError(ExecutionError):
    """
    Exception raised when a program runs past its wall-clock limit.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class NonDeterministicSeedError(ExecutionError):
    """
    Exception raised when two runs of the same program disagree.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class RuntimeUnavailableError(ExecutionError):
    """
    Exception raised when the interpreter or compiler for a subject language is not installed.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
