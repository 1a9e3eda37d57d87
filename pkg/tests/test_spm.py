import os
import shutil
from typing import Callable, List, Optional

import numpy as np
import pytest

from corpus.loader import load_corpus
from corpus.models import SeedProgram
from execution.sandbox import Sandbox
from faults.errors import FaultInjectionError
from faults.injector import inject_fault
from faults.models import FaultKind, FaultyProgram
from source_model.models import Quartile, SubjectLanguage
from source_model.parser import parse_source
from source_model.utils import quartile_of, split_lines
from spm.content import ModelContentProvider, TemplateContentProvider, sanitize_comment
from spm.engine import (
    PlanFailure,
    apply_plan,
    apply_spm,
    parse_kind,
    parse_plans,
    standard_mutant_set,
    standard_plans,
)
from spm.errors import InsufficientTargetsError, InvalidSpmKindError, SpmError
from spm.models import ContentMode, MutantProgram, SpmKind, plan_label
from spm.preservation import PreservationChecker, verify_preservation
from spm.snippets import DeadStatement, java_dead_statement, python_dead_statement

TEMPLATES = TemplateContentProvider()
DEMO_CORPUS = os.path.join(os.path.dirname(__file__), "..", "resources", "demo_corpus")

requires_java = pytest.mark.skipif(
    shutil.which("javac") is None or shutil.which("java") is None, reason="no JDK installed"
)


@pytest.fixture
def faulty(py_seed: SeedProgram) -> FaultyProgram:
    # operator swap on line 29, in the last quartile
    return inject_fault(py_seed, FaultKind.operator_swap, Quartile.Q4, rng_seed=0)


@pytest.fixture
def java_faulty(java_seed: SeedProgram) -> FaultyProgram:
    return inject_fault(java_seed, FaultKind.incorrect_boolean_logic, Quartile.Q4, rng_seed=0)


def _fault_line_kept(mutant: MutantProgram, faulty: FaultyProgram) -> None:
    lines, _ = split_lines(mutant.source_text)
    fault_text = split_lines(faulty.source_text)[0][faulty.fault.fault_line - 1]
    assert lines[mutant.tracked_fault_line - 1] == fault_text
    assert mutant.fault_line_text == fault_text
    assert mutant.ledger.map_line(faulty.fault.fault_line) == mutant.tracked_fault_line
    parse_source(mutant.source_text, mutant.subject_language)


def test_plan_labels() -> None:
    assert plan_label((SpmKind.misleading_variable_names, SpmKind.misleading_comments)) == (
        "M_c(M_v)"
    )
    assert [plan_label(p) for p in standard_plans(SubjectLanguage.PY)] == [
        "M_c",
        "M_v",
        "M_d",
        "M_c(M_v)",
        "M_c(M_v(M_d))",
    ]
    assert "M_f" in [plan_label(p) for p in standard_plans(SubjectLanguage.JAVA)]
    assert len(standard_plans(SubjectLanguage.JAVA)) == 6


@pytest.mark.parametrize(
    "text, language, expected",
    [
        ("single:c", SubjectLanguage.PY, [(SpmKind.misleading_comments,)]),
        ("single:DeadCode", SubjectLanguage.JAVA, [(SpmKind.dead_code,)]),
        ("single:M_f", SubjectLanguage.PY, []),
    ],
    ids=["label", "kind_name", "unsupported_language"],
)
def test_parse_plans(text: str, language: SubjectLanguage, expected: List[tuple]) -> None:
    assert parse_plans(text, language) == expected


def test_parse_plans_rejects_unknown() -> None:
    with pytest.raises(InvalidSpmKindError):
        parse_plans("everything", SubjectLanguage.PY)
    with pytest.raises(InvalidSpmKindError):
        parse_kind("x")


def test_dead_code(faulty: FaultyProgram) -> None:
    mutant = apply_spm(faulty, SpmKind.dead_code, 3, Quartile.Q1, TEMPLATES, rng_seed=0)
    assert mutant.plan == "M_d"
    assert mutant.steps[0].effective_strength == 3
    assert mutant.line_count > len(split_lines(faulty.source_text)[0])
    assert mutant.tracked_fault_line > faulty.fault.fault_line
    assert mutant.content_mode == ContentMode.template
    _fault_line_kept(mutant, faulty)


ELIF_PY = """def grade(score):
    if score >= 90:
        label = "A"
    elif score >= 80:
        label = "B"
    elif score >= 70:
        label = "C"
    else:
        label = "F"
    return label


def bonus(score):
    points = score + 5
    if points > 100:
        points = 100
    elif points < 0:
        points = 0
    return points


def main():
    for score in [95, 85, 72, 10]:
        print(grade(score), bonus(score))


main()
"""


def test_dead_code_keeps_elif_chains(make_seed: Callable[..., SeedProgram]) -> None:
    faulty = inject_fault(
        make_seed(ELIF_PY), FaultKind.operator_swap, quartile_of(14, 27), rng_seed=0
    )
    assert faulty.fault.fault_line == 14
    for rng_seed in range(40):
        for quartile in (Quartile.Q1, Quartile.Q2):
            mutant = apply_spm(faulty, SpmKind.dead_code, 8, quartile, TEMPLATES, rng_seed)
            assert mutant.steps[0].effective_strength == 8
            _fault_line_kept(mutant, faulty)


def test_mutation_is_deterministic(faulty: FaultyProgram) -> None:
    first = apply_spm(faulty, SpmKind.dead_code, 4, Quartile.Q2, TEMPLATES, rng_seed=9)
    second = apply_spm(faulty, SpmKind.dead_code, 4, Quartile.Q2, TEMPLATES, rng_seed=9)
    other = apply_spm(faulty, SpmKind.dead_code, 4, Quartile.Q2, TEMPLATES, rng_seed=10)
    assert first == second
    assert first.mutant_id != other.mutant_id


def test_comments_inserted_without_existing_comments(faulty: FaultyProgram) -> None:
    mutant = apply_spm(
        faulty, SpmKind.misleading_comments, 2, Quartile.Q1, TEMPLATES, rng_seed=0
    )
    comment_lines = [
        line for line in split_lines(mutant.source_text)[0] if line.lstrip().startswith("# ")
    ]
    assert len(comment_lines) == 2
    assert mutant.line_count == len(split_lines(faulty.source_text)[0]) + 2
    _fault_line_kept(mutant, faulty)


def test_comments_replaced_in_place(make_seed: Callable[..., SeedProgram]) -> None:
    source = (
        "def area(width, height):\n"
        "    # width times height\n"
        "    return width * height\n"
        "\n"
        "\n"
        "def main():\n"
        "    print(area(2, 3) + 1)  # seven\n"
        "\n"
        "\n"
        "main()\n"
    )
    faulty = inject_fault(make_seed(source), FaultKind.operator_swap, Quartile.Q3, 0)
    mutant = apply_spm(
        faulty, SpmKind.misleading_comments, 1, Quartile.Q1, TEMPLATES, rng_seed=0
    )
    lines = split_lines(mutant.source_text)[0]
    assert mutant.line_count == 10
    assert lines[1].startswith("    # ")
    assert lines[1] != "    # width times height"
    assert mutant.steps[0].effective_strength == 1


def test_renames(faulty: FaultyProgram) -> None:
    mutant = apply_spm(
        faulty, SpmKind.misleading_variable_names, 2, Quartile.Q1, TEMPLATES, rng_seed=0
    )
    assert mutant.steps[0].effective_strength == 2
    assert mutant.source_text != faulty.source_text
    assert mutant.line_count == len(split_lines(faulty.source_text)[0])
    _fault_line_kept(mutant, faulty)


def test_renames_partial_strength(faulty: FaultyProgram) -> None:
    # only `data` is declared in the last quartile off the fault line
    mutant = apply_spm(
        faulty, SpmKind.misleading_variable_names, 8, Quartile.Q4, TEMPLATES, rng_seed=0
    )
    assert mutant.steps[0].effective_strength == 1
    with pytest.raises(InsufficientTargetsError) as e:
        apply_spm(
            faulty,
            SpmKind.misleading_variable_names,
            8,
            Quartile.Q4,
            TEMPLATES,
            rng_seed=0,
            allow_partial=False,
        )
    assert e.value.available == 1


def test_function_shuffle(java_faulty: FaultyProgram) -> None:
    mutant = apply_spm(
        java_faulty, SpmKind.function_shuffle, 1, Quartile.Q1, TEMPLATES, rng_seed=0
    )
    assert mutant.plan == "M_f"
    assert mutant.source_text != java_faulty.source_text
    assert sorted(split_lines(mutant.source_text)[0]) == sorted(
        split_lines(java_faulty.source_text)[0]
    )
    _fault_line_kept(mutant, java_faulty)


@pytest.mark.parametrize(
    "kind, strength, error",
    [
        (SpmKind.function_shuffle, 1, InvalidSpmKindError),
        (SpmKind.dead_code, 9, SpmError),
        (SpmKind.dead_code, 0, SpmError),
    ],
    ids=["shuffle_on_python", "strength_too_high", "strength_zero"],
)
def test_apply_spm_rejects(
    kind: SpmKind, strength: int, error: type, faulty: FaultyProgram
) -> None:
    with pytest.raises(error):
        apply_spm(faulty, kind, strength, Quartile.Q1, TEMPLATES, rng_seed=0)


def test_standard_mutant_set(faulty: FaultyProgram) -> None:
    failures: List[PlanFailure] = []
    mutants = standard_mutant_set(faulty, 2, Quartile.Q1, TEMPLATES, 0, failures)
    assert [m.plan for m in mutants] == ["M_c", "M_v", "M_d", "M_c(M_v)", "M_c(M_v(M_d))"]
    assert failures == []
    by_plan = {m.plan: m for m in mutants}
    assert by_plan["M_c(M_v)"].kinds == (
        SpmKind.misleading_variable_names,
        SpmKind.misleading_comments,
    )
    for mutant in mutants:
        _fault_line_kept(mutant, faulty)
    # the composed mutant continues from the plain M_d mutant
    nested = apply_plan(
        faulty,
        (SpmKind.dead_code, SpmKind.misleading_variable_names, SpmKind.misleading_comments),
        2,
        Quartile.Q1,
        TEMPLATES,
        0,
    )
    assert nested == by_plan["M_c(M_v(M_d))"]


def test_java_standard_mutant_set(java_faulty: FaultyProgram) -> None:
    mutants = standard_mutant_set(java_faulty, 1, Quartile.Q1, TEMPLATES, 0)
    assert "M_f" in [m.plan for m in mutants]
    for mutant in mutants:
        _fault_line_kept(mutant, java_faulty)


def test_model_content_provider() -> None:
    prompts: List[str] = []

    def ask(prompt: str) -> str:
        prompts.append(prompt)
        return "1. cursorPos\n- 2bad\nfor\n`goodName`\n"

    provider = ModelContentProvider(ask, "helper")
    rng = np.random.default_rng(0)
    names = provider.rename_candidates("total", "local", SubjectLanguage.PY, rng)
    assert names[:2] == ["cursorPos", "goodName"]
    assert len(names) > 2
    provider.rename_candidates("total", "local", SubjectLanguage.PY, rng)
    assert len(prompts) == 1
    assert provider.mode == ContentMode.model_generated


def test_model_content_provider_falls_back() -> None:
    def ask(prompt: str) -> str:
        raise RuntimeError("offline")

    provider = ModelContentProvider(ask, "helper")
    rng = np.random.default_rng(0)
    statements = provider.dead_code_statements(SubjectLanguage.JAVA, "class A {}", rng)
    assert statements
    assert all("_" not in s.name and s.literal for s in statements)


@pytest.mark.parametrize(
    "line, expected",
    [
        (
            "cache_size = len(values) * 2",
            DeadStatement("cache_size", "len(values) * 2", literal=False),
        ),
        ("retry_limit = 3", DeadStatement("retry_limit", "3")),
        ("labels = ('a', 'b')", DeadStatement("labels", "('a', 'b')")),
        ("shown = print(1)", None),
        ("head = values.pop()", None),
        ("a, b = 1, 2", None),
        ("total = (n := 4)", None),
        ("counter = counter + 1", None),
        ("level = depth + 1", None),
        ("if ready: x = 1", None),
        ("not python at all", None),
    ],
    ids=[
        "pure_expression",
        "literal",
        "literal_tuple",
        "impure_call",
        "method_call",
        "two_targets",
        "walrus",
        "reads_itself",
        "reads_global",
        "compound",
        "garbage",
    ],
)
def test_python_dead_statement(line: str, expected: Optional[DeadStatement]) -> None:
    assert python_dead_statement(line, {"depth"}) == expected


@pytest.mark.parametrize(
    "line, expected",
    [
        ("int retryLimit = 3 * 4;", DeadStatement("retryLimit", "3 * 4")),
        ("long stamp = 5L;", DeadStatement("stamp", "5L", type_name="long")),
        ("double ratio = -1.5;", DeadStatement("ratio", "-1.5", type_name="double")),
        ("boolean ready = !false;", DeadStatement("ready", "!false", type_name="boolean")),
        (
            'String banner = "a" + "b";',
            DeadStatement("banner", '"a" + "b"', type_name="String"),
        ),
        ("int size = values.length;", None),
        ("int big = 99999999999;", None),
        ("int ratio = 1 / 0;", None),
        ("int flag = true;", None),
        ("int a = 1, b = 2;", None),
        ("final int c = 1;", None),
        ("reset();", None),
    ],
    ids=[
        "int",
        "long",
        "double",
        "boolean",
        "string",
        "reads_field",
        "too_large",
        "division",
        "wrong_type",
        "two_declarators",
        "modifier",
        "call",
    ],
)
def test_java_dead_statement(line: str, expected: Optional[DeadStatement]) -> None:
    assert java_dead_statement(line) == expected


def test_dead_code_from_model(faulty: FaultyProgram) -> None:
    prompts: List[str] = []

    def ask(prompt: str) -> str:
        prompts.append(prompt)
        return "cache_size = len(data) * 2\nprint('side effect')\nwarm_start = 3\n"

    provider = ModelContentProvider(ask, "helper")
    mutant = apply_spm(faulty, SpmKind.dead_code, 2, Quartile.Q1, provider, rng_seed=0)
    assert mutant.content_mode == ContentMode.model_generated
    assert faulty.source_text in prompts[0]
    lines = split_lines(mutant.source_text)[0]
    (computed,) = [i for i, line in enumerate(lines) if "len(data) * 2" in line]
    # a statement that reads variables only goes where it never runs
    shell = lines[computed - 1].strip()
    assert shell == "if False:" or shell.startswith("def cache_size(")
    assert any("warm_start" in line for line in lines)
    assert not any("side effect" in line for line in lines)
    _fault_line_kept(mutant, faulty)


def test_dead_code_from_model_in_java(java_faulty: FaultyProgram) -> None:
    def ask(prompt: str) -> str:
        return "int size = values.length;\nint retryLimit = 3 * 4;\n"

    provider = ModelContentProvider(ask, "helper")
    mutant = apply_spm(java_faulty, SpmKind.dead_code, 1, Quartile.Q1, provider, rng_seed=0)
    assert "retryLimit" in mutant.source_text
    assert mutant.source_text.count("values.length") == java_faulty.source_text.count(
        "values.length"
    )
    _fault_line_kept(mutant, java_faulty)


def test_model_dead_code_rejected_replies_use_templates() -> None:
    def ask(prompt: str) -> str:
        return "os.remove(path)\nx, y = 1, 2\n"

    provider = ModelContentProvider(ask, "helper")
    source = "def f():\n    return 1\n"
    statements = provider.dead_code_statements(
        SubjectLanguage.PY, source, np.random.default_rng(0)
    )
    expected = TEMPLATES.dead_code_statements(SubjectLanguage.PY, source, np.random.default_rng(0))
    assert statements == expected


@pytest.mark.parametrize(
    "text, expected",
    [
        ("/* evil */ text\n more", "evil text more"),
        ("# Sort the list.", "Sort the list."),
        ("   ", None),
        ("x" * 101, None),
    ],
    ids=["markers", "hash_prefix", "blank", "too_long"],
)
def test_sanitize_comment(text: str, expected: str) -> None:
    assert sanitize_comment(text) == expected


def test_preservation_real_run(faulty: FaultyProgram) -> None:
    mutants = standard_mutant_set(faulty, 3, Quartile.Q2, TEMPLATES, 0)
    checker = PreservationChecker(Sandbox(timeout_s=10))
    assert checker.checkable(faulty)
    results = checker.check(faulty, mutants)
    assert [r.equivalent for r in results] == [True] * len(mutants)
    assert verify_preservation(faulty, mutants[0], Sandbox(timeout_s=10)).equivalent


def test_preservation_not_checkable(make_seed: Callable[..., SeedProgram]) -> None:
    faulty = inject_fault(make_seed(runnable=False), FaultKind.operator_swap, Quartile.Q1, 0)
    assert not PreservationChecker(Sandbox()).checkable(faulty)


def _checkable_fault(seed: SeedProgram, checker: PreservationChecker) -> Optional[FaultyProgram]:
    for kind in FaultKind:
        for quartile in Quartile:
            try:
                faulty = inject_fault(seed, kind, quartile, 0)
            except FaultInjectionError:
                continue
            if checker.checkable(faulty):
                return faulty
    return None


@pytest.mark.parametrize(
    "file_name, language",
    [
        pytest.param("python.jsonl", SubjectLanguage.PY, id="python"),
        pytest.param("java.jsonl", SubjectLanguage.JAVA, id="java", marks=requires_java),
    ],
)
def test_demo_mutants_preserve_behaviour(file_name: str, language: SubjectLanguage) -> None:
    seeds = load_corpus(os.path.join(DEMO_CORPUS, file_name), language)
    checker = PreservationChecker(Sandbox(timeout_s=10, parallel=8))
    changed: List[str] = []
    checked = 0
    for seed in seeds:
        faulty = _checkable_fault(seed, checker)
        assert faulty is not None, seed.seed_id
        mutants = [
            mutant
            for quartile in Quartile
            for strength in (1, 4, 8)
            for mutant in standard_mutant_set(faulty, strength, quartile, TEMPLATES, 7)
        ]
        results = checker.check(faulty, mutants)
        checked += len(results)
        changed.extend(f"{r.mutant_id}: {r.evidence}" for r in results if not r.equivalent)
    assert changed == []
    # every quartile and strength yields at least one mutant per seed
    assert checked >= len(seeds) * 4 * 3
