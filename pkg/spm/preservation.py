"""
This module checks that mutants behave exactly like the faulty programs they came from.
"""

import logging
from typing import Dict, List, Sequence

from pydantic import BaseModel, ConfigDict

from execution.errors import ExecutionError, ExecutionTimeoutError, NonDeterministicSeedError
from execution.models import ExecutionResult
from execution.sandbox import Job, Sandbox
from faults.models import FaultyProgram
from spm.models import MutantProgram

logger = logging.getLogger(__name__)


class PreservationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    mutant_id: str
    equivalent: bool
    evidence: str


def describe_difference(parent: ExecutionResult, mutant: ExecutionResult) -> str:
    if parent.observable() == mutant.observable():
        return "identical exit status and output"
    if parent.compile_error != mutant.compile_error:
        return f"compile error: parent={parent.compile_error}, mutant={mutant.compile_error}"
    if parent.timed_out != mutant.timed_out:
        return f"timed out: parent={parent.timed_out}, mutant={mutant.timed_out}"
    if parent.exit_code != mutant.exit_code:
        return f"exit status: parent={parent.exit_code}, mutant={mutant.exit_code}"
    position = next(
        (i for i, (a, b) in enumerate(zip(parent.stdout, mutant.stdout)) if a != b),
        min(len(parent.stdout), len(mutant.stdout)),
    )
    return f"stdout differs at character {position}"


def _parent_run(sandbox: Sandbox, parent: FaultyProgram) -> ExecutionResult:
    seed = parent.seed
    if not seed.runnable:
        raise ExecutionError(f"Seed '{seed.seed_id}' has no driver invocation.")
    jobs: List[Job] = [(parent.source_text, parent.subject_language, seed.stdin)] * 2
    first, second = sandbox.run_many(jobs)
    if first is None or second is None:
        raise ExecutionError(f"Fault {parent.fault.fault_id} could not be run.")
    if first.timed_out:
        raise ExecutionTimeoutError(f"Faulty program {parent.fault.fault_id} timed out.")
    if first.observable() != second.observable():
        raise NonDeterministicSeedError(
            f"Faulty program {parent.fault.fault_id} produced differing runs."
        )
    return first


def verify_preservation(
    parent: FaultyProgram, mutant: MutantProgram, sandbox: Sandbox
) -> PreservationResult:
    """
    Runs parent and mutant on the seed's driver input; they are equivalent when exit status,
    stdout and termination match. The parent runs twice to rule out nondeterminism.
    """
    return PreservationChecker(sandbox).check(parent, [mutant])[0]


class PreservationChecker:
    """
    Verifies many mutants, running each faulty parent once per checker.
    """

    def __init__(self, sandbox: Sandbox) -> None:
        self._sandbox = sandbox
        self._parents: Dict[str, ExecutionResult] = {}

    def check(
        self, parent: FaultyProgram, mutants: Sequence[MutantProgram]
    ) -> List[PreservationResult]:
        fault_id = parent.fault.fault_id
        if fault_id not in self._parents:
            self._parents[fault_id] = _parent_run(self._sandbox, parent)
        reference = self._parents[fault_id]

        jobs: List[Job] = [
            (m.source_text, m.subject_language, parent.seed.stdin) for m in mutants
        ]
        results: List[PreservationResult] = []
        for mutant, outcome in zip(mutants, self._sandbox.run_many(jobs)):
            if outcome is None:
                raise ExecutionError(f"Mutant {mutant.mutant_id} could not be run.")
            equivalent = outcome.observable() == reference.observable()
            evidence = describe_difference(reference, outcome)
            if not equivalent:
                logger.error(
                    f"Mutant {mutant.mutant_id} ({mutant.plan}) changed behaviour: {evidence}"
                )
            results.append(
                PreservationResult(
                    mutant_id=mutant.mutant_id, equivalent=equivalent, evidence=evidence
                )
            )
        return results

    def checkable(self, parent: FaultyProgram) -> bool:
        """
        Returns whether mutants of `parent` can be verified: the seed is runnable, its runtime
        is installed and the faulty program itself runs deterministically within the limit.
        """
        if not parent.seed.runnable or not self._sandbox.available(parent.subject_language):
            return False
        fault_id = parent.fault.fault_id
        try:
            if fault_id not in self._parents:
                self._parents[fault_id] = _parent_run(self._sandbox, parent)
        except ExecutionError as e:
            logger.warning(f"Skipping preservation checks for {fault_id}: {e.message}")
            return False
        return True
