from typing import Callable, Dict, List

import pytest

from corpus.models import SeedProgram
from execution.models import ExecutionResult
from execution.sandbox import Sandbox
from faults.errors import FaultInjectionError, NoApplicableSiteError
from faults.injector import generate_fault_tasks, inject_fault
from faults.kill import KillChecker
from faults.models import FAULT_KINDS, FaultKind
from faults.sites import discover_fault_sites
from source_model.models import Quartile, SubjectLanguage
from source_model.parser import parse_source
from source_model.utils import QUARTILES, quartile_of, split_lines


class ScriptedSandbox(Sandbox):
    """
    Answers runs from a table keyed by source text instead of starting processes.
    """

    def __init__(self, outputs: Dict[str, ExecutionResult], default: ExecutionResult) -> None:
        super().__init__(timeout_s=1, parallel=1)
        self.outputs = outputs
        self.default = default
        self.runs = 0

    def available(self, language: SubjectLanguage) -> bool:
        return True

    def run(self, source_text: str, language: SubjectLanguage, stdin: str = "") -> ExecutionResult:
        self.runs += 1
        return self.outputs.get(source_text, self.default)


@pytest.mark.parametrize(
    "kind, lines",
    [
        (FaultKind.off_by_one, [3, 28]),
        (FaultKind.misplaced_return, [2, 3, 9, 10, 17, 19, 25, 26, 27]),
        (FaultKind.incorrect_boolean_logic, [11, 11, 11, 17, 19]),
        (FaultKind.operator_swap, [4, 12, 29, 29]),
    ],
    ids=["off_by_one", "misplaced_return", "boolean_logic", "operator_swap"],
)
def test_discover_fault_sites(kind: FaultKind, lines: List[int], py_seed: SeedProgram) -> None:
    index = parse_source(py_seed.source_text, SubjectLanguage.PY)
    assert [site.line for site in discover_fault_sites(index, kind)] == lines


@pytest.mark.parametrize(
    "kind, quartile",
    [
        (FaultKind.off_by_one, Quartile.Q1),
        (FaultKind.incorrect_boolean_logic, Quartile.Q3),
        (FaultKind.operator_swap, Quartile.Q4),
    ],
    ids=["off_by_one", "boolean_logic", "operator_swap"],
)
def test_inject_replacement_fault(
    kind: FaultKind, quartile: Quartile, py_seed: SeedProgram
) -> None:
    faulty = inject_fault(py_seed, kind, quartile, rng_seed=1)
    fault = faulty.fault
    seed_lines, _ = split_lines(py_seed.source_text)
    faulty_lines, _ = split_lines(fault.faulty_source)
    assert len(seed_lines) == len(faulty_lines)
    changed = [i + 1 for i, (a, b) in enumerate(zip(seed_lines, faulty_lines)) if a != b]
    assert changed == [fault.fault_line]
    assert quartile_of(fault.fault_line, len(faulty_lines)) == quartile
    assert fault.before_snippet != fault.after_snippet
    assert fault.killed is None
    # the faulty program still parses
    parse_source(fault.faulty_source, SubjectLanguage.PY)


def test_inject_misplaced_return(py_seed: SeedProgram) -> None:
    faulty = inject_fault(py_seed, FaultKind.misplaced_return, Quartile.Q2, rng_seed=0)
    fault = faulty.fault
    faulty_lines, _ = split_lines(fault.faulty_source)
    assert len(faulty_lines) == len(split_lines(py_seed.source_text)[0]) + 1
    assert faulty_lines[fault.fault_line - 1] == "    return"
    assert fault.fault_line in (9, 10)


def test_inject_java_misplaced_return(java_seed: SeedProgram) -> None:
    faulty = inject_fault(java_seed, FaultKind.misplaced_return, Quartile.Q1, rng_seed=0)
    line = split_lines(faulty.fault.faulty_source)[0][faulty.fault.fault_line - 1]
    assert line.strip().startswith("if (true) return")


def test_inject_is_deterministic(py_seed: SeedProgram) -> None:
    first = inject_fault(py_seed, FaultKind.operator_swap, Quartile.Q4, rng_seed=5)
    second = inject_fault(py_seed, FaultKind.operator_swap, Quartile.Q4, rng_seed=5)
    assert first.fault == second.fault


def test_inject_without_site(py_seed: SeedProgram) -> None:
    with pytest.raises(NoApplicableSiteError):
        inject_fault(py_seed, FaultKind.off_by_one, Quartile.Q2, rng_seed=0)


def test_generate_fault_tasks(py_seed: SeedProgram) -> None:
    programs = generate_fault_tasks([py_seed], FAULT_KINDS, QUARTILES, 1, rng_seed=3)
    combinations = {(p.fault.kind, p.fault.quartile) for p in programs}
    assert len(programs) == 11
    assert len(combinations) == 11
    assert (FaultKind.off_by_one, Quartile.Q2) not in combinations
    again = generate_fault_tasks([py_seed], FAULT_KINDS, QUARTILES, 1, rng_seed=3)
    assert [p.fault.fault_id for p in programs] == [p.fault.fault_id for p in again]


def test_generate_fault_tasks_distinct(py_seed: SeedProgram) -> None:
    programs = generate_fault_tasks(
        [py_seed], [FaultKind.misplaced_return], [Quartile.Q4], 3, rng_seed=0
    )
    assert 1 <= len(programs) <= 3
    assert len({p.fault.fault_line for p in programs}) == len(programs)


def test_generate_fault_tasks_rejects_zero(py_seed: SeedProgram) -> None:
    with pytest.raises(FaultInjectionError):
        generate_fault_tasks([py_seed], FAULT_KINDS, QUARTILES, 0, rng_seed=0)


def test_kill_checker(py_seed: SeedProgram) -> None:
    programs = generate_fault_tasks(
        [py_seed], [FaultKind.operator_swap], [Quartile.Q1, Quartile.Q2, Quartile.Q4], 1, 0
    )
    assert len(programs) == 3
    same = ExecutionResult(0, "same\n", "")
    sandbox = ScriptedSandbox(
        {
            programs[0].source_text: ExecutionResult(0, "changed\n", ""),
            programs[1].source_text: ExecutionResult(None, "", "error", compile_error=True),
        },
        same,
    )
    checked = KillChecker(sandbox).check(programs)
    assert [p.fault.fault_id for p in checked] == [
        programs[0].fault.fault_id,
        programs[2].fault.fault_id,
    ]
    assert checked[0].fault.killed is True
    assert checked[1].fault.killed is False
    # two reference runs plus one run per fault
    assert sandbox.runs == 5


def test_kill_checker_skips_unrunnable_seed(make_seed: Callable[..., SeedProgram]) -> None:
    seed = make_seed(runnable=False)
    programs = generate_fault_tasks([seed], [FaultKind.operator_swap], [Quartile.Q1], 1, 0)
    sandbox = ScriptedSandbox({}, ExecutionResult(0, "", ""))
    checked = KillChecker(sandbox).check(programs)
    assert [p.fault.killed for p in checked] == [None]
    assert sandbox.runs == 0


def test_kill_checker_excludes_nondeterministic_seed(py_seed: SeedProgram) -> None:
    programs = generate_fault_tasks([py_seed], [FaultKind.operator_swap], [Quartile.Q1], 1, 0)

    class FlakySandbox(ScriptedSandbox):
        def run(
            self, source_text: str, language: SubjectLanguage, stdin: str = ""
        ) -> ExecutionResult:
            self.runs += 1
            return ExecutionResult(0, f"{self.runs}\n", "")

    checked = KillChecker(FlakySandbox({}, ExecutionResult(0, "", ""))).check(programs)
    assert checked[0].fault.killed is None
