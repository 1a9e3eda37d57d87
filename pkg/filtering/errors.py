"""
This module contains the custom exceptions for the under-specification filter module.
"""

from typing import List, Tuple


class FilterError(Exception):
    """
    Base class for all filter exceptions.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class MissingAnswersError(FilterError):
    """
    Exception raised when a (task, model) pair the filter needs has no stored answer.
    """

    def __init__(self, missing: List[Tuple[str, str]]) -> None:
        shown = ", ".join(f"{task}/{model}" for task, model in missing[:5])
        more = f" and {len(missing) - 5} more" if len(missing) > 5 else ""
        super().__init__(f"Missing answers for {shown}{more}.")
        self.missing = missing
