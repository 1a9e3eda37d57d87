"""
This module discovers candidate fault sites in a syntax index.
"""

from typing import Dict, List, Tuple

from faults.models import FaultKind, FaultSite
from source_model.models import BoundaryLevel, OperatorSite, SyntaxIndex

BOOLEAN_SWAPS: Dict[str, str] = {
    "and": "or",
    "or": "and",
    "&&": "||",
    "||": "&&",
    "==": "!=",
    "!=": "==",
    "<": "<=",
    "<=": "<",
    ">": ">=",
    ">=": ">",
}
ARITH_SWAPS: Dict[str, str] = {
    "+": "-",
    "-": "+",
    "*": "/",
    "/": "*",
    "//": "*",
    "%": "/",
}


def _operator_sites(kind: FaultKind, sites: Tuple[OperatorSite, ...]) -> List[FaultSite]:
    swaps = BOOLEAN_SWAPS if kind == FaultKind.incorrect_boolean_logic else ARITH_SWAPS
    return [
        FaultSite(kind=kind, line=site.span.line, span=site.span, text=site.token)
        for site in sites
        if site.token in swaps
    ]


def discover_fault_sites(index: SyntaxIndex, kind: FaultKind) -> List[FaultSite]:
    """
    Returns every site of `kind`, in source order. May be empty.
    """
    if kind == FaultKind.off_by_one:
        found = []
        for loop in index.loop_sites:
            bound = loop.upper or loop.lower
            if bound is None:
                continue
            found.append(
                FaultSite(
                    kind=kind,
                    line=bound.span.line,
                    span=bound.span,
                    text=bound.text,
                    int_value=bound.int_value,
                    atomic=bound.atomic,
                )
            )
        return found
    if kind == FaultKind.misplaced_return:
        return [
            FaultSite(kind=kind, line=boundary.line, boundary=boundary)
            for boundary in index.statement_boundaries
            if boundary.level == BoundaryLevel.function
            and not boundary.is_last_in_body
            and boundary.return_type != "<init>"
        ]
    if kind == FaultKind.incorrect_boolean_logic:
        return _operator_sites(kind, index.boolean_op_sites)
    return _operator_sites(kind, index.arith_op_sites)
