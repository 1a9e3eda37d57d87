"""
This module contains the line ledger, which maps original line numbers to their position after
one or more edit batches.
"""

from typing import Dict, Optional, Tuple

from source_model.errors import LineDeletedError, LineOutOfRangeError


class LineLedger:
    """
    Total mapping original_line -> current_line (None when the line was deleted).
    """

    def __init__(self, mapping: Dict[int, Optional[int]], new_line_count: int) -> None:
        self._mapping = dict(mapping)
        self._new_line_count = new_line_count

    @classmethod
    def identity(cls, line_count: int) -> "LineLedger":
        return cls({line: line for line in range(1, line_count + 1)}, line_count)

    @property
    def original_line_count(self) -> int:
        return len(self._mapping)

    @property
    def new_line_count(self) -> int:
        return self._new_line_count

    def __getitem__(self, line: int) -> Optional[int]:
        if line not in self._mapping:
            raise LineOutOfRangeError(
                f"Line {line} is outside [1, {self.original_line_count}]."
            )
        return self._mapping[line]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LineLedger):
            return NotImplemented
        return (
            self._mapping == other._mapping and self._new_line_count == other._new_line_count
        )

    def __repr__(self) -> str:
        return f"LineLedger({self.original_line_count} -> {self._new_line_count} lines)"

    def map_line(self, line: int) -> int:
        """
        Returns the current position of an original line.
        """
        current = self[line]
        if current is None:
            raise LineDeletedError(f"Line {line} no longer exists.")
        return current

    def is_identity(self) -> bool:
        return self._new_line_count == self.original_line_count and all(
            line == current for line, current in self._mapping.items()
        )

    def compose(self, later: "LineLedger") -> "LineLedger":
        """
        Returns the ledger of applying this batch and then `later`.
        """
        if later.original_line_count != self._new_line_count:
            raise LineOutOfRangeError(
                f"Cannot compose a ledger ending at {self._new_line_count} lines with one "
                f"starting at {later.original_line_count} lines."
            )
        mapping: Dict[int, Optional[int]] = {}
        for line, current in self._mapping.items():
            mapping[line] = None if current is None else later[current]
        return LineLedger(mapping, later.new_line_count)

    def as_tuple(self) -> Tuple[Optional[int], ...]:
        return tuple(self._mapping[line] for line in range(1, self.original_line_count + 1))
