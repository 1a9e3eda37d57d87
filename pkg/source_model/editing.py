"""
This module applies batches of textual edits to source text and records where every original
line ends up.
"""

import logging
from collections import defaultdict
from typing import DefaultDict, Dict, List, Optional, Sequence, Tuple

from source_model.errors import OverlappingEditsError, SpanOutOfRangeError
from source_model.ledger import LineLedger
from source_model.models import Edit, EditKind
from source_model.utils import join_lines, split_lines

logger = logging.getLogger(__name__)

# (original line number or None for inserted lines, text)
_Item = Tuple[Optional[int], str]


def _validate(edits: Sequence[Edit], lines: List[str]) -> None:
    total = len(lines)
    replaced: DefaultDict[int, List[Tuple[int, int]]] = defaultdict(list)
    moves: List[Tuple[int, int]] = []

    for edit in edits:
        if edit.kind == EditKind.replace_span:
            if not 1 <= edit.line <= total:
                raise SpanOutOfRangeError(f"Replace targets line {edit.line} of {total}.")
            width = len(lines[edit.line - 1])
            if not 0 <= edit.start_col <= edit.end_col <= width:
                raise SpanOutOfRangeError(
                    f"Columns {edit.start_col}:{edit.end_col} outside line {edit.line} "
                    f"(width {width})."
                )
            if "\n" in edit.text:
                raise SpanOutOfRangeError("Replacement text must stay on one line.")
            replaced[edit.line].append((edit.start_col, edit.end_col))
        elif edit.kind == EditKind.insert_lines_before:
            if not 1 <= edit.line <= total + 1:
                raise SpanOutOfRangeError(f"Insert targets line {edit.line} of {total}.")
            if any("\n" in line for line in edit.lines):
                raise SpanOutOfRangeError("Inserted lines must not contain newlines.")
        else:
            if not 1 <= edit.line <= edit.end_line <= total:
                raise SpanOutOfRangeError(
                    f"Move block {edit.line}-{edit.end_line} outside [1, {total}]."
                )
            if not 1 <= edit.dest_line <= total + 1:
                raise SpanOutOfRangeError(f"Move destination {edit.dest_line} of {total}.")
            moves.append((edit.line, edit.end_line))

    for line, spans in replaced.items():
        spans.sort()
        for (_, prev_end), (start, _) in zip(spans, spans[1:]):
            if start < prev_end:
                raise OverlappingEditsError(f"Replacements overlap on line {line}.")

    moves.sort()
    for (_, prev_end), (start, _) in zip(moves, moves[1:]):
        if start <= prev_end:
            raise OverlappingEditsError(f"Move blocks overlap at line {start}.")
    for edit in edits:
        if edit.kind == EditKind.move_block:
            for start, end in moves:
                if start <= edit.dest_line <= end:
                    raise OverlappingEditsError(
                        f"Move destination {edit.dest_line} lies inside block {start}-{end}."
                    )


def _line_suffix(lines: List[str]) -> str:
    # CRLF files keep their "\r" on inserted lines too
    if lines and all(line.endswith("\r") for line in lines):
        return "\r"
    return ""


def apply_edits(source_text: str, edits: Sequence[Edit]) -> Tuple[str, LineLedger]:
    """
    Applies a batch of non-overlapping edits, all expressed in the coordinates of `source_text`.
    """
    lines, trailing_newline = split_lines(source_text)
    if not edits:
        return source_text, LineLedger.identity(len(lines))
    _validate(edits, lines)

    texts = list(lines)
    by_line: DefaultDict[int, List[Edit]] = defaultdict(list)
    for edit in edits:
        if edit.kind == EditKind.replace_span:
            by_line[edit.line].append(edit)
    for line, line_edits in by_line.items():
        text = texts[line - 1]
        for edit in sorted(line_edits, key=lambda e: e.start_col, reverse=True):
            text = text[: edit.start_col] + edit.text + text[edit.end_col :]
        texts[line - 1] = text

    items: List[_Item] = [(number, text) for number, text in enumerate(texts, start=1)]

    for edit in edits:
        if edit.kind != EditKind.move_block:
            continue
        moved = [_in_block(item, edit) for item in items]
        block = [item for item, inside in zip(items, moved) if inside]
        items = [item for item, inside in zip(items, moved) if not inside]
        index = _position_of(items, edit.dest_line)
        items[index:index] = block

    suffix = _line_suffix(lines)
    for edit in edits:
        if edit.kind != EditKind.insert_lines_before:
            continue
        index = _position_of(items, edit.line)
        items[index:index] = [(None, line + suffix) for line in edit.lines]

    mapping: Dict[int, Optional[int]] = {number: None for number in range(1, len(lines) + 1)}
    for position, (number, _) in enumerate(items, start=1):
        if number is not None:
            mapping[number] = position
    new_text = join_lines([text for _, text in items], trailing_newline or not lines)
    logger.debug(f"Applied {len(edits)} edits: {len(lines)} -> {len(items)} lines")
    return new_text, LineLedger(mapping, len(items))


def _position_of(items: List[_Item], line: int) -> int:
    """
    Index of the item holding original `line`; past-the-end lines map to the end.
    """
    for index, (number, _) in enumerate(items):
        if number == line:
            return index
    return len(items)


def _in_block(item: _Item, edit: Edit) -> bool:
    return item[0] is not None and edit.line <= item[0] <= edit.end_line
