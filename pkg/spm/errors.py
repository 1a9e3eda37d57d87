"""
This module contains the custom exceptions for the semantic-preserving mutation module.
"""


class SpmError(Exception):
    """
    Base class for all mutation exceptions.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class NoApplicableTargetError(SpmError):
    """
    Exception raised when a quartile has nothing the operator can mutate.
    """

    def __init__(self, kind: str, quartile: str) -> None:
        super().__init__(f"No {kind} target in {quartile}.")
        self.kind = kind
        self.quartile = quartile


class InsufficientTargetsError(SpmError):
    """
    Exception raised when fewer targets than the requested strength exist and partial
    application is not allowed.
    """

    def __init__(self, message: str, available: int) -> None:
        super().__init__(message)
        self.available = available


class RenameCollisionError(SpmError):
    """
    Exception raised when every candidate name collides with a name already in the program.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class InvalidSpmKindError(SpmError):
    """
    Exception raised for an unknown mutation kind, or one not defined for the subject language.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class SpmIntegrityError(SpmError):
    """
    Exception raised when a mutation breaks parsing or loses track of the fault line.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
