"""
This module runs faulty programs against their seeds to flag faults that change observable
behaviour.
"""

import logging
from typing import Dict, List, Optional, Sequence

from corpus.models import SeedProgram
from execution.errors import ExecutionTimeoutError, NonDeterministicSeedError
from execution.models import ExecutionResult
from execution.sandbox import Job, Sandbox
from faults.models import FaultyProgram

logger = logging.getLogger(__name__)


def reference_run(sandbox: Sandbox, seed: SeedProgram) -> ExecutionResult:
    """
    Runs a seed twice and returns the agreed result.
    """
    jobs: List[Job] = [(seed.source_text, seed.subject_language, seed.stdin)] * 2
    first, second = sandbox.run_many(jobs)
    if first is None or second is None:
        raise NonDeterministicSeedError(f"Seed '{seed.seed_id}' could not be run.")
    if first.timed_out:
        raise ExecutionTimeoutError(f"Seed '{seed.seed_id}' timed out.")
    if first.observable() != second.observable():
        raise NonDeterministicSeedError(f"Seed '{seed.seed_id}' produced differing runs.")
    return first


class KillChecker:
    """
    Marks each fault killed=True when its program's output, exit status or termination differs
    from the seed's. Faults of seeds that cannot be checked keep killed=None; faulty programs
    that no longer compile are dropped.
    """

    def __init__(self, sandbox: Sandbox) -> None:
        self._sandbox = sandbox
        self._references: Dict[str, Optional[ExecutionResult]] = {}

    def _reference(self, seed: SeedProgram) -> Optional[ExecutionResult]:
        if seed.seed_id not in self._references:
            result: Optional[ExecutionResult] = None
            if seed.runnable and self._sandbox.available(seed.subject_language):
                try:
                    result = reference_run(self._sandbox, seed)
                except (NonDeterministicSeedError, ExecutionTimeoutError) as e:
                    logger.warning(f"Excluding seed from dynamic checks: {e.message}")
            self._references[seed.seed_id] = result
        return self._references[seed.seed_id]

    def check(self, faulty_programs: Sequence[FaultyProgram]) -> List[FaultyProgram]:
        checkable = [(p, self._reference(p.seed)) for p in faulty_programs]
        jobs: List[Job] = [
            (p.source_text, p.subject_language, p.seed.stdin)
            for p, reference in checkable
            if reference is not None
        ]
        outcomes = iter(self._sandbox.run_many(jobs))

        checked: List[FaultyProgram] = []
        for program, reference in checkable:
            if reference is None:
                checked.append(program)
                continue
            outcome = next(outcomes)
            if outcome is None:
                checked.append(program)
                continue
            if outcome.compile_error:
                logger.warning(
                    f"Dropping fault {program.fault.fault_id} of '{program.seed.seed_id}': "
                    f"faulty program does not compile"
                )
                continue
            killed = outcome.observable() != reference.observable()
            fault = program.fault.model_copy(update={"killed": killed})
            checked.append(program.model_copy(update={"fault": fault}))
        killed_count = sum(1 for p in checked if p.fault.killed)
        logger.info(f"Kill check: {killed_count} of {len(checked)} faults change behaviour")
        return checked
