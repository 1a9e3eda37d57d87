"""
This module writes a report directory: one CSV per table and a JSON summary, all
byte-identical for identical inputs.
"""

import csv
import json
import logging
import os
from collections import Counter
from typing import Any, Dict, List, Optional, Sequence, Tuple

from gateway.models import AnswerStatus, ModelAnswer
from metrics.errors import MetricsError
from metrics.models import ABSENT, ScoreRecord, StrengthCurve, Table
from metrics.tables import (
    baseline_accuracy,
    location_heatmap,
    longitudinal,
    model_category_accuracy,
    robustness_failure_rate,
    spm_type_accuracy,
    strength_curves,
)

logger = logging.getLogger(__name__)


def fmt(value: Optional[float]) -> str:
    return ABSENT if value is None else f"{value:.4f}"


def _rounded(value: Optional[float]) -> Optional[float]:
    return None if value is None else round(value, 4)


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def table_rows(table: Table) -> Tuple[List[str], List[List[Any]]]:
    header = list(table.axes) + [
        table.hit_label,
        "unparsed",
        "total",
        table.rate_label,
        "within_tolerance",
        "tolerance_rate",
    ]
    rows = []
    for cell in table.cells:
        rows.append(
            list(cell.key)
            + [
                cell.hits,
                cell.unparsed,
                cell.total,
                fmt(cell.rate),
                cell.within_tolerance,
                fmt(cell.tolerance_rate),
            ]
        )
    return header, rows


def write_table(report_dir: str, table: Table) -> str:
    path = os.path.join(report_dir, f"{table.name}.csv")
    header, rows = table_rows(table)
    _write_csv(path, header, rows)
    return path


def write_strength_curves(report_dir: str, curves: Sequence[StrengthCurve]) -> str:
    path = os.path.join(report_dir, "strength_curves.csv")
    rows = []
    for curve in curves:
        for point in curve.points:
            rows.append(
                [
                    curve.model_name,
                    curve.plan,
                    curve.subject_language,
                    point.key[0],
                    point.hits,
                    point.total,
                    fmt(point.rate),
                    f"{curve.slope:.4f}",
                ]
            )
    header = ["model_name", "plan", "subject_language", "strength", "correct", "total"]
    _write_csv(path, header + ["accuracy", "slope"], rows)
    return path


def emit_report(
    report_dir: str,
    baseline_scores: Sequence[ScoreRecord],
    spm_scores: Sequence[ScoreRecord],
    answers: Sequence[ModelAnswer] = (),
    retained: Optional[Sequence[str]] = None,
    longitudinal_pairs: Sequence[Tuple[str, str]] = (),
    exclude_unkilled: bool = False,
    tolerance: int = 0,
) -> Dict[str, Any]:
    """
    Writes every table and summary.json into `report_dir` and returns the summary. Mutation
    tables are only written when mutation-phase scores exist.
    """
    if not baseline_scores:
        raise MetricsError("No baseline scores to report.")
    if exclude_unkilled:
        baseline_scores = [s for s in baseline_scores if s.killed is not False]
        spm_scores = [s for s in spm_scores if s.killed is not False]
    os.makedirs(report_dir, exist_ok=True)
    retained_ids = set(retained) if retained is not None else None
    if retained_ids is not None:
        baseline_scores = [s for s in baseline_scores if s.task_id in retained_ids]
    all_scores = list(baseline_scores) + list(spm_scores)

    baseline = baseline_accuracy(baseline_scores)
    write_table(report_dir, baseline)
    heatmap, share = location_heatmap(baseline_scores)
    write_table(report_dir, heatmap)
    write_table(report_dir, share)
    write_table(report_dir, model_category_accuracy(all_scores))

    summary: Dict[str, Any] = {
        "tolerance": tolerance,
        "exclude_unkilled": exclude_unkilled,
        "baseline": _phase_summary(baseline_scores),
    }
    if spm_scores:
        robustness, micro, macro = robustness_failure_rate(baseline_scores, spm_scores)
        write_table(report_dir, robustness)
        write_table(report_dir, spm_type_accuracy(spm_scores))
        curves = strength_curves(spm_scores)
        write_strength_curves(report_dir, curves)
        summary["spm"] = _phase_summary(spm_scores)
        summary["robustness"] = {
            "micro_failure_rate": _rounded(micro),
            "macro_failure_rate": _rounded(macro),
            "per_model": {
                cell.key[0]: {"failed": cell.hits, "total": cell.total}
                for cell in robustness.cells
            },
        }
        summary["slopes"] = {
            f"{c.model_name}|{c.plan}|{c.subject_language}": round(c.slope, 4) for c in curves
        }
    if longitudinal_pairs:
        _write_longitudinal(report_dir, all_scores, longitudinal_pairs)

    skipped = Counter(a.model_name for a in answers if a.status == AnswerStatus.skipped)
    summary["skipped"] = dict(sorted(skipped.items()))
    killed = {s.fault_id: s.killed for s in baseline_scores}
    checked = [k for k in killed.values() if k is not None]
    summary["faults"] = {
        "total": len(killed),
        "checked": len(checked),
        "killed": sum(1 for k in checked if k),
        "kill_rate": _rounded(100.0 * sum(checked) / len(checked)) if checked else None,
    }
    with open(os.path.join(report_dir, "summary.json"), "w", encoding="utf-8") as f:
        f.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    logger.info(f"Report written to '{report_dir}'")
    return summary


def _phase_summary(scores: Sequence[ScoreRecord]) -> Dict[str, Any]:
    per_model: Dict[str, Dict[str, Any]] = {}
    for model_name in sorted({s.model_name for s in scores}):
        mine = [s for s in scores if s.model_name == model_name]
        correct = sum(1 for s in mine if s.correct)
        unparsed = sum(1 for s in mine if not s.parsed)
        per_model[model_name] = {
            "correct": correct,
            "total": len(mine),
            "accuracy": _rounded(100.0 * correct / len(mine)),
            "unparsed_rate": _rounded(100.0 * unparsed / len(mine)),
            "tolerance_accuracy": _rounded(
                100.0 * sum(1 for s in mine if s.within_tolerance) / len(mine)
            ),
        }
    return {"tasks": len(scores), "models": per_model}


def _write_longitudinal(
    report_dir: str, scores: Sequence[ScoreRecord], pairs: Sequence[Tuple[str, str]]
) -> None:
    rows = [
        [older, newer, phase, old.hits, old.total, fmt(old.rate), new.hits, new.total,
         fmt(new.rate), fmt(delta)]
        for older, newer, phase, old, new, delta in longitudinal(scores, pairs)
    ]
    header = ["older", "newer", "phase", "older_correct", "older_total", "older_accuracy"]
    header += ["newer_correct", "newer_total", "newer_accuracy", "delta"]
    _write_csv(os.path.join(report_dir, "longitudinal.csv"), header, rows)

