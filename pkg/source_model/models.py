"""
This module contains the language-independent view of a parsed program: the mutation-site
index every frontend produces and the edit records applied to source text.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Optional, Tuple


class SubjectLanguage(str, Enum):
    PY = "PY"
    JAVA = "JAVA"


class Quartile(str, Enum):
    Q1 = "Q1"
    Q2 = "Q2"
    Q3 = "Q3"
    Q4 = "Q4"


class EditKind(str, Enum):
    replace_span = "ReplaceSpan"
    insert_lines_before = "InsertLinesBefore"
    move_block = "MoveBlock"


class BoundaryLevel(str, Enum):
    module = "module"
    function = "function"
    class_body = "class_body"


@dataclass(frozen=True)
class Span:
    """
    A single-line region of text; columns are 0-based character offsets, end exclusive.
    """

    line: int
    start_col: int
    end_col: int


@dataclass(frozen=True)
class BoundSite:
    """
    One side of a loop range: the expression text and whether it is a plain integer literal.
    """

    span: Span
    text: str
    int_value: Optional[int] = None
    atomic: bool = True


@dataclass(frozen=True)
class LoopSite:
    line: int
    upper: Optional[BoundSite]
    lower: Optional[BoundSite]
    scope: Optional[str] = None


@dataclass(frozen=True)
class OperatorSite:
    span: Span
    token: str
    scope: Optional[str] = None


@dataclass(frozen=True)
class StatementBoundary:
    """
    A line before which a whole statement may be inserted at the given indentation.
    """

    line: int
    indent: str
    level: BoundaryLevel
    is_last_in_body: bool
    function_name: Optional[str] = None
    return_type: Optional[str] = None
    text: str = ""


@dataclass(frozen=True)
class FunctionSpan:
    name: str
    start_line: int
    end_line: int
    body_insertion_points: Tuple[int, ...]
    class_name: Optional[str] = None
    movable: bool = False


@dataclass(frozen=True)
class CommentSite:
    span: Span
    text: str
    full_line: bool
    style: str


@dataclass(frozen=True)
class IdentifierEntry:
    name: str
    declaration: Span
    occurrences: Tuple[Span, ...]
    scope_id: str
    kind: str


@dataclass(frozen=True)
class SyntaxIndex:
    language: SubjectLanguage
    line_count: int
    loop_sites: Tuple[LoopSite, ...] = ()
    boolean_op_sites: Tuple[OperatorSite, ...] = ()
    arith_op_sites: Tuple[OperatorSite, ...] = ()
    statement_boundaries: Tuple[StatementBoundary, ...] = ()
    function_spans: Tuple[FunctionSpan, ...] = ()
    comment_spans: Tuple[CommentSite, ...] = ()
    identifier_table: Tuple[IdentifierEntry, ...] = ()
    reserved_names: FrozenSet[str] = field(default_factory=frozenset)
    indent_unit: str = "    "


@dataclass(frozen=True)
class Edit:
    """
    A textual edit. ReplaceSpan rewrites part of one line, InsertLinesBefore adds whole lines
    before `line` (line_count + 1 appends), MoveBlock moves lines [line, end_line] before
    `dest_line`.
    """

    kind: EditKind
    line: int
    start_col: int = 0
    end_col: int = 0
    end_line: int = 0
    dest_line: int = 0
    text: str = ""
    lines: Tuple[str, ...] = ()

    @classmethod
    def replace(cls, span: Span, text: str) -> "Edit":
        return cls(
            kind=EditKind.replace_span,
            line=span.line,
            start_col=span.start_col,
            end_col=span.end_col,
            text=text,
        )

    @classmethod
    def insert_before(cls, line: int, lines: Tuple[str, ...]) -> "Edit":
        return cls(kind=EditKind.insert_lines_before, line=line, lines=tuple(lines))

    @classmethod
    def move(cls, start_line: int, end_line: int, dest_line: int) -> "Edit":
        return cls(
            kind=EditKind.move_block, line=start_line, end_line=end_line, dest_line=dest_line
        )
