"""
This module contains the custom exceptions for the metrics module.
"""


class MetricsError(Exception):
    """
    Base class for all metrics exceptions.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class InsufficientStrengthsError(MetricsError):
    """
    Exception raised when a strength curve has fewer than two populated strengths.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)


class UnknownModelPairError(MetricsError):
    """
    Exception raised when a longitudinal pair names a model without scores.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
