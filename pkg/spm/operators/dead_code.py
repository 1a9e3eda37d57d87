"""
This module inserts code that never runs or whose result is never read.
"""

import logging
from typing import AbstractSet, Callable, Dict, List, Set, Tuple

import numpy as np

from source_model.models import BoundaryLevel, Edit, Quartile, StatementBoundary, SubjectLanguage
from spm.content import ContentProvider
from spm.errors import NoApplicableTargetError, RenameCollisionError
from spm.models import SpmKind
from spm.operators.base import SpmOperator, in_quartile
from spm.snippets import DeadStatement
from spm.state import MutationState

logger = logging.getLogger(__name__)

# (indent, indent_unit, statement) -> block lines
Shape = Callable[[str, str, DeadStatement], Tuple[str, ...]]


def _py_guarded(indent: str, unit: str, dead: DeadStatement) -> Tuple[str, ...]:
    return (f"{indent}if False:", f"{indent}{unit}{dead.name} = {dead.expression}")


def _py_unused_local(indent: str, unit: str, dead: DeadStatement) -> Tuple[str, ...]:
    return (f"{indent}{dead.name} = {dead.expression}",)


def _py_uncalled_function(indent: str, unit: str, dead: DeadStatement) -> Tuple[str, ...]:
    return (f"{indent}def {dead.name}():", f"{indent}{unit}return {dead.expression}")


def _java_guarded(indent: str, unit: str, dead: DeadStatement) -> Tuple[str, ...]:
    declaration = f"{dead.type_name} {dead.name} = {dead.expression};"
    return (f"{indent}if (false) {{", f"{indent}{unit}{declaration}", f"{indent}}}")


def _java_unused_local(indent: str, unit: str, dead: DeadStatement) -> Tuple[str, ...]:
    return (f"{indent}{dead.type_name} {dead.name} = {dead.expression};",)


def _java_uncalled_method(indent: str, unit: str, dead: DeadStatement) -> Tuple[str, ...]:
    return (
        f"{indent}private static {dead.type_name} {dead.name}() {{",
        f"{indent}{unit}return {dead.expression};",
        f"{indent}}}",
    )


# class bodies only get the guarded shape in Python: any binding there becomes a class attribute
SHAPES: Dict[Tuple[SubjectLanguage, BoundaryLevel], Tuple[Shape, ...]] = {
    (SubjectLanguage.PY, BoundaryLevel.module): (
        _py_guarded,
        _py_unused_local,
        _py_uncalled_function,
    ),
    (SubjectLanguage.PY, BoundaryLevel.function): (
        _py_guarded,
        _py_unused_local,
        _py_uncalled_function,
    ),
    (SubjectLanguage.PY, BoundaryLevel.class_body): (_py_guarded,),
    (SubjectLanguage.JAVA, BoundaryLevel.function): (_java_guarded, _java_unused_local),
    (SubjectLanguage.JAVA, BoundaryLevel.class_body): (_java_uncalled_method,),
}
# shapes whose statement runs
EXECUTED_SHAPES = frozenset({_py_unused_local, _java_unused_local})


class DeadCodeOperator(SpmOperator):
    """
    Inserts `strength` blocks before statement boundaries in the quartile. Boundaries may be
    reused, so the effective strength always equals the requested one.
    """

    @property
    def kind(self) -> SpmKind:
        return SpmKind.dead_code

    def apply(
        self,
        state: MutationState,
        strength: int,
        quartile: Quartile,
        provider: ContentProvider,
        rng: np.random.Generator,
    ) -> int:
        index = state.index()
        boundaries = [
            b
            for b in index.statement_boundaries
            if (state.language, b.level) in SHAPES and in_quartile(b.line, state, quartile)
        ]
        if not boundaries:
            raise NoApplicableTargetError(self.kind.value, quartile.value)

        statements = self._fresh_statements(provider, state, index.reserved_names, strength, rng)
        edits: List[Edit] = []
        for dead in statements:
            boundary: StatementBoundary = boundaries[int(rng.integers(len(boundaries)))]
            shapes = [
                shape
                for shape in SHAPES[(state.language, boundary.level)]
                if dead.literal or shape not in EXECUTED_SHAPES
            ]
            shape = shapes[int(rng.integers(len(shapes)))]
            block = shape(boundary.indent, index.indent_unit, dead)
            edits.append(Edit.insert_before(boundary.line, block))
            logger.debug(
                f"Dead code '{dead.name}' ({len(block)} lines) before line {boundary.line}"
            )
        state.apply(edits)
        return strength

    def _fresh_statements(
        self,
        provider: ContentProvider,
        state: MutationState,
        reserved: AbstractSet[str],
        count: int,
        rng: np.random.Generator,
    ) -> List[DeadStatement]:
        chosen: List[DeadStatement] = []
        taken: Set[str] = set()
        for dead in provider.dead_code_statements(state.language, state.source_text, rng):
            if dead.name not in reserved and dead.name not in taken:
                chosen.append(dead)
                taken.add(dead.name)
            if len(chosen) == count:
                return chosen
        raise RenameCollisionError(f"Ran out of fresh dead-code names after {len(chosen)}.")
