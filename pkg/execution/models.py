from dataclasses import dataclass
from typing import Optional, Tuple


@dataclass(frozen=True)
class ExecutionResult:
    """
    Outcome of one sandboxed run. `exit_code` is None when the run timed out or never started.
    """

    exit_code: Optional[int]
    stdout: str
    stderr: str
    timed_out: bool = False
    compile_error: bool = False

    def observable(self) -> Tuple[Optional[int], str, bool, bool]:
        """
        The parts of a run compared between programs; stderr is excluded since tracebacks name
        temporary paths and identifiers.
        """
        return self.exit_code, self.stdout, self.timed_out, self.compile_error
