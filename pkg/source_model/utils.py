import hashlib
import json
from typing import Any, List, Tuple

import numpy as np

from source_model.errors import LineOutOfRangeError
from source_model.models import Quartile

QUARTILES: Tuple[Quartile, ...] = (Quartile.Q1, Quartile.Q2, Quartile.Q3, Quartile.Q4)


def split_lines(text: str) -> Tuple[List[str], bool]:
    """
    Splits text into physical lines on "\\n" only. Returns the lines and whether the text ended
    with a newline.
    """
    if text == "":
        return [], False
    parts = text.split("\n")
    if parts[-1] == "":
        return parts[:-1], True
    return parts, False


def join_lines(lines: List[str], trailing_newline: bool) -> str:
    if not lines:
        return ""
    text = "\n".join(lines)
    return text + "\n" if trailing_newline else text


def line_count(text: str) -> int:
    return len(split_lines(text)[0])


def count_loc(text: str) -> int:
    """
    Counts non-empty, non-whitespace-only lines.
    """
    return sum(1 for line in split_lines(text)[0] if line.strip())


def estimate_tokens(text: str, chars_per_token: int = 4) -> int:
    return -(-len(text) // chars_per_token)


def quartile_of(line: int, total_lines: int) -> Quartile:
    """
    Q_k holds the lines up to ceil(k * total_lines / 4).
    """
    if total_lines < 1 or not 1 <= line <= total_lines:
        raise LineOutOfRangeError(f"Line {line} is outside [1, {total_lines}].")
    for k, quartile in enumerate(QUARTILES[:3], start=1):
        if line <= (k * total_lines + 3) // 4:
            return quartile
    return Quartile.Q4


def quartile_bounds(quartile: Quartile, total_lines: int) -> Tuple[int, int]:
    """
    Returns the inclusive line range of a quartile; an empty quartile has start > end.
    """
    k = QUARTILES.index(quartile) + 1
    start = 1 if k == 1 else ((k - 1) * total_lines + 3) // 4 + 1
    end = (k * total_lines + 3) // 4 if k < 4 else total_lines
    return start, end


def content_hash(*parts: Any, length: int = 16) -> str:
    """
    Stable hex digest over JSON-serialisable parts.
    """
    payload = json.dumps(parts, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:length]


def stable_rng(*parts: Any) -> np.random.Generator:
    """
    Returns a numpy generator seeded from a stable hash of the given parts.
    """
    return np.random.default_rng(int(content_hash(*parts, length=32), 16))


class LineMap:
    """
    Converts UTF-8 byte columns (as reported by ast and tree-sitter) to character columns.
    """

    def __init__(self, text: str) -> None:
        self._lines = split_lines(text)[0]

    def line_text(self, line: int) -> str:
        if 1 <= line <= len(self._lines):
            return self._lines[line - 1]
        return ""

    def char_col(self, line: int, byte_col: int) -> int:
        text = self.line_text(line)
        if text.isascii():
            return byte_col
        return len(text.encode("utf-8")[:byte_col].decode("utf-8", errors="ignore"))

    def leading(self, line: int, col: int) -> str:
        return self.line_text(line)[:col]

    def trailing(self, line: int, col: int) -> str:
        return self.line_text(line)[col:]
