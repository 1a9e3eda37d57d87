"""
This module decides which baseline tasks are specified well enough to keep, and which of
them each model may carry into the mutation phase.
"""

import logging
from typing import Dict, List, Mapping, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from filtering.errors import MissingAnswersError
from gateway.models import AnswerStatus, FaultLocTask, ModelAnswer

logger = logging.getLogger(__name__)

AnswerKey = Tuple[str, str]


class FilterVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: str
    fault_id: str
    retained: bool
    localizing_models: Tuple[str, ...]
    panel: Tuple[str, ...]

    @model_validator(mode="after")
    def _check_retained(self) -> "FilterVerdict":
        if self.retained != bool(self.localizing_models):
            raise ValueError("A task is retained exactly when some panel model localizes it.")
        return self


def index_answers(answers: Sequence[ModelAnswer]) -> Dict[AnswerKey, ModelAnswer]:
    return {(a.task_id, a.model_name): a for a in answers}


def is_correct(task: FaultLocTask, answer: ModelAnswer) -> bool:
    answered = answer.status == AnswerStatus.answered
    return answered and answer.predicted_line == task.ground_truth_line


def _require(
    tasks: Sequence[FaultLocTask], models: Sequence[str], answers: Mapping[AnswerKey, ModelAnswer]
) -> None:
    missing = [(t.task_id, m) for t in tasks for m in models if (t.task_id, m) not in answers]
    if missing:
        raise MissingAnswersError(missing)


def filter_underspecified(
    baseline_tasks: Sequence[FaultLocTask],
    panel: Sequence[str],
    answers: Sequence[ModelAnswer],
) -> Tuple[List[FaultLocTask], List[FaultLocTask], List[FilterVerdict]]:
    """
    Keeps a task when at least one panel model names its fault line. Returns the retained
    tasks, the excluded tasks and one verdict per task, all in input order.
    """
    by_key = index_answers(answers)
    _require(baseline_tasks, panel, by_key)
    retained: List[FaultLocTask] = []
    excluded: List[FaultLocTask] = []
    verdicts: List[FilterVerdict] = []
    for task in baseline_tasks:
        localizing = tuple(m for m in panel if is_correct(task, by_key[(task.task_id, m)]))
        verdict = FilterVerdict(
            task_id=task.task_id,
            fault_id=task.fault_id,
            retained=bool(localizing),
            localizing_models=localizing,
            panel=tuple(panel),
        )
        verdicts.append(verdict)
        (retained if verdict.retained else excluded).append(task)
    logger.info(
        f"Filter kept {len(retained)} of {len(baseline_tasks)} tasks with a panel of {len(panel)}"
    )
    return retained, excluded, verdicts


def gate_for_model(
    retained_tasks: Sequence[FaultLocTask], model_name: str, answers: Sequence[ModelAnswer]
) -> List[FaultLocTask]:
    """
    Returns the retained tasks `model_name` localized correctly at baseline.
    """
    by_key = index_answers(answers)
    _require(retained_tasks, [model_name], by_key)
    eligible = [t for t in retained_tasks if is_correct(t, by_key[(t.task_id, model_name)])]
    logger.info(f"{model_name}: {len(eligible)} of {len(retained_tasks)} retained tasks eligible")
    return eligible
