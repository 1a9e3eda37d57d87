"""
This module contains the custom exceptions for the cli module.
"""


class StageError(Exception):
    """
    Base class for all pipeline stage exceptions. `stage` names the subcommand that failed.
    """

    def __init__(self, message: str, stage: str = "pipeline") -> None:
        super().__init__(message)
        self.message = message
        self.stage = stage


class DependencyMissingError(StageError):
    """
    Exception raised when a stage runs before the stage whose output it reads.
    """

    def __init__(self, output: str, stage: str = "pipeline") -> None:
        super().__init__(f"Missing stage output '{output}'; run the earlier stage first.", stage)
        self.output = output


class ConfigFileError(StageError):
    """
    Exception raised when the config file cannot be read or does not validate.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message, "config")
