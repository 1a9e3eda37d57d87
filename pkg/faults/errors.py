"""
This module contains the custom exceptions for the fault injection module.
"""


class FaultInjectionError(Exception):
    """
    Base class for all fault injection exceptions.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class NoApplicableSiteError(FaultInjectionError):
    """
    Exception raised when a program has no site of the requested kind in the requested quartile.
    """

    def __init__(self, kind: str, quartile: str) -> None:
        super().__init__(f"No {kind} site in {quartile}.")
        self.kind = kind
        self.quartile = quartile


class FaultIntegrityError(FaultInjectionError):
    """
    Exception raised when an injected fault breaks the program's syntax or its single-edit shape.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
