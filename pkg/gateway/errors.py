"""
This module contains the custom exceptions for the model gateway module.
"""


class GatewayError(Exception):
    """
    Base class for all model gateway exceptions.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class ProviderError(GatewayError):
    """
    Exception raised when a backend fails for good, including after exhausted retries.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class TransientProviderError(ProviderError):
    """
    Exception raised for failures worth retrying: rate limits, server errors, dropped
    connections.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class AuthMissingError(GatewayError):
    """
    Exception raised when the environment variable holding a credential is unset.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class ContextOverflowError(GatewayError):
    """
    Exception raised when a prompt does not fit the model's context window.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class UnknownModelError(GatewayError):
    """
    Exception raised when a model name matches no configured profile or built-in mock.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
