"""
This module computes the aggregate tables of a report from score records.
"""

import logging
from collections import defaultdict
from enum import Enum
from typing import (
    Callable,
    Collection,
    DefaultDict,
    Dict,
    Iterable,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
)

import numpy as np

from faults.models import FAULT_KINDS
from metrics.errors import InsufficientStrengthsError, UnknownModelPairError
from metrics.models import Cell, ScoreRecord, StrengthCurve, Table
from source_model.utils import QUARTILES
from spm.models import MAX_STRENGTH, MIN_STRENGTH

logger = logging.getLogger(__name__)

ALL = "ALL"
NONE = "-"


def axis_value(score: ScoreRecord, axis: str) -> str:
    value = getattr(score, axis)
    if value is None:
        return NONE
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def _cell(
    key: Tuple[str, ...], scores: Sequence[ScoreRecord], hit: Callable[[ScoreRecord], bool]
) -> Cell:
    return Cell(
        key=key,
        hits=sum(1 for s in scores if hit(s)),
        total=len(scores),
        unparsed=sum(1 for s in scores if not s.parsed),
        within_tolerance=sum(1 for s in scores if s.within_tolerance),
    )


def _correct(score: ScoreRecord) -> bool:
    return score.correct


def _failed(score: ScoreRecord) -> bool:
    return not score.correct


def group(
    scores: Iterable[ScoreRecord], axes: Sequence[str]
) -> Dict[Tuple[str, ...], List[ScoreRecord]]:
    groups: DefaultDict[Tuple[str, ...], List[ScoreRecord]] = defaultdict(list)
    for score in scores:
        groups[tuple(axis_value(score, axis) for axis in axes)].append(score)
    return dict(groups)


def accuracy_table(
    name: str,
    scores: Sequence[ScoreRecord],
    axes: Sequence[str],
    rollup: bool = False,
    grid: Optional[Sequence[Sequence[str]]] = None,
) -> Table:
    """
    Accuracy per distinct key over `axes`, sorted by key. With `rollup`, every key prefix also
    gets an ALL row over the last axis. `grid` lists the values expected on each axis; missing
    combinations appear as absent cells.
    """
    groups = group(scores, axes)
    if rollup and axes:
        prefixes = group(scores, axes[:-1])
        for prefix, members in prefixes.items():
            groups[prefix + (ALL,)] = members
    keys: Set[Tuple[str, ...]] = set(groups)
    if grid is not None:
        keys |= set(_product(grid))
    cells = tuple(_cell(key, groups.get(key, []), _correct) for key in sorted(keys))
    return Table(name=name, axes=tuple(axes), cells=cells)


def _product(grid: Sequence[Sequence[str]]) -> List[Tuple[str, ...]]:
    keys: List[Tuple[str, ...]] = [()]
    for values in grid:
        keys = [key + (value,) for key in keys for value in values]
    return keys


def baseline_accuracy(
    scores: Sequence[ScoreRecord],
    group_by: Sequence[str] = ("model_name", "fault_kind", "subject_language"),
    retained: Optional[Collection[str]] = None,
) -> Table:
    """
    Share of retained baseline tasks localized correctly, per cell of `group_by`.
    """
    kept = [s for s in scores if retained is None or s.task_id in retained]
    return accuracy_table("baseline_accuracy", kept, group_by)


def robustness_failure_rate(
    baseline_scores: Sequence[ScoreRecord],
    spm_scores: Sequence[ScoreRecord],
    group_by: Sequence[str] = ("model_name",),
) -> Tuple[Table, Optional[float], Optional[float]]:
    """
    Share of mutation-phase tasks answered wrongly among those whose baseline the same model
    localized. Returns the table, the task-weighted overall rate and the model-averaged one.
    """
    solved = {(s.fault_id, s.model_name) for s in baseline_scores if s.correct}
    eligible = [s for s in spm_scores if (s.fault_id, s.model_name) in solved]
    dropped = len(spm_scores) - len(eligible)
    if dropped:
        logger.warning(f"Ignoring {dropped} mutation-phase scores without a solved baseline")
    groups = sorted(group(eligible, group_by).items())
    cells = tuple(_cell(key, members, _failed) for key, members in groups)
    table = Table(
        name="robustness",
        axes=tuple(group_by),
        cells=cells,
        hit_label="failed",
        rate_label="failure_rate",
    )
    micro = _cell((), eligible, _failed).rate
    per_model = [
        _cell(key, members, _failed).rate
        for key, members in group(eligible, ("model_name",)).items()
    ]
    rates = [rate for rate in per_model if rate is not None]
    macro = float(np.mean(rates)) if rates else None
    return table, micro, macro


def fit_slope(strengths: Sequence[int], rates: Sequence[float]) -> float:
    """
    Least-squares change in accuracy (percentage points) per strength step.
    """
    slope, _ = np.polyfit(np.asarray(strengths, dtype=float), np.asarray(rates, dtype=float), 1)
    return float(slope)


def strength_curve(
    spm_scores: Sequence[ScoreRecord],
    model_name: str,
    plan: str,
    subject_language: str,
) -> StrengthCurve:
    """
    Accuracy at every strength from 1 to 8 and the fitted slope over populated strengths.
    `plan` and `subject_language` accept ALL.
    """
    selected = [
        s
        for s in spm_scores
        if s.model_name == model_name
        and (plan == ALL or s.plan == plan)
        and (subject_language == ALL or s.subject_language.value == subject_language)
    ]
    by_strength = group(selected, ("strength",))
    points = tuple(
        _cell((str(k),), by_strength.get((str(k),), []), _correct)
        for k in range(MIN_STRENGTH, MAX_STRENGTH + 1)
    )
    populated: List[Tuple[int, float]] = [
        (int(p.key[0]), p.rate) for p in points if p.rate is not None
    ]
    if len(populated) < 2:
        raise InsufficientStrengthsError(
            f"{model_name}/{plan}/{subject_language} has {len(populated)} populated strengths."
        )
    slope = fit_slope([k for k, _ in populated], [r for _, r in populated])
    return StrengthCurve(model_name, plan, subject_language, points, slope)


def strength_curves(spm_scores: Sequence[ScoreRecord]) -> List[StrengthCurve]:
    """
    Curves for every (model, plan, language) combination, plus ALL rollups over plans and
    languages. Combinations with fewer than two strengths are left out.
    """
    combos: Set[Tuple[str, str, str]] = set()
    for s in spm_scores:
        for plan in (s.plan or NONE, ALL):
            for language in (s.subject_language.value, ALL):
                combos.add((s.model_name, plan, language))
    curves = []
    for model_name, plan, language in sorted(combos):
        try:
            curves.append(strength_curve(spm_scores, model_name, plan, language))
        except InsufficientStrengthsError as e:
            logger.debug(e.message)
    return curves


def location_heatmap(scores: Sequence[ScoreRecord]) -> Tuple[Table, Table]:
    """
    Accuracy per (model, fault kind, fault quartile) over the full kind x quartile grid, and
    each quartile's share of a model's correct localizations.
    """
    models = sorted({s.model_name for s in scores})
    kinds = [k.value for k in FAULT_KINDS]
    quartiles = [q.value for q in QUARTILES]
    heatmap = accuracy_table(
        "location_heatmap",
        scores,
        ("model_name", "fault_kind", "fault_quartile"),
        grid=(models, kinds, quartiles),
    )
    correct = [s for s in scores if s.correct]
    share_cells = []
    for model_name in models:
        mine = [s for s in correct if s.model_name == model_name]
        for quartile in quartiles:
            hits = sum(1 for s in mine if s.fault_quartile.value == quartile)
            share_cells.append(Cell(key=(model_name, quartile), hits=hits, total=len(mine)))
    share = Table(
        name="quartile_share",
        axes=("model_name", "fault_quartile"),
        cells=tuple(share_cells),
        hit_label="correct_in_quartile",
        rate_label="share",
    )
    return heatmap, share


def spm_type_accuracy(spm_scores: Sequence[ScoreRecord]) -> Table:
    """
    Accuracy per mutation plan and the quartile it targeted, with an ALL row per plan.
    """
    return accuracy_table("spm_type", spm_scores, ("plan", "spm_quartile"), rollup=True)


def longitudinal(
    scores: Sequence[ScoreRecord], pairs: Sequence[Tuple[str, str]]
) -> List[Tuple[str, str, str, Cell, Cell, Optional[float]]]:
    """
    Compares two versions of a model per phase. Each row is (older, newer, phase, older cell,
    newer cell, delta in percentage points).
    """
    known = {s.model_name for s in scores}
    rows = []
    for older, newer in pairs:
        for name in (older, newer):
            if name not in known:
                raise UnknownModelPairError(f"Model '{name}' has no scores to compare.")
        for phase in sorted({s.phase.value for s in scores}):
            in_phase = [s for s in scores if s.phase.value == phase]
            old = _cell((older,), [s for s in in_phase if s.model_name == older], _correct)
            new = _cell((newer,), [s for s in in_phase if s.model_name == newer], _correct)
            delta = None
            if old.rate is not None and new.rate is not None:
                delta = new.rate - old.rate
            rows.append((older, newer, phase, old, new, delta))
    return rows


def model_category_accuracy(scores: Sequence[ScoreRecord]) -> Table:
    return accuracy_table("model_category", scores, ("model_category", "phase"))
