"""
This module judges stored answers against the ground truth of their tasks.
"""

import logging
from typing import List, Mapping, Optional, Sequence

from gateway.models import AnswerStatus, FaultLocTask, ModelAnswer
from metrics.models import ScoreRecord

logger = logging.getLogger(__name__)


def score_answer(
    task: FaultLocTask,
    answer: ModelAnswer,
    tolerance: int = 0,
    model_category: Optional[str] = None,
    killed: Optional[bool] = None,
) -> ScoreRecord:
    """
    Exact line match decides `correct`; `within_tolerance` accepts answers up to `tolerance`
    lines away. Unparsed answers are incorrect.
    """
    predicted = answer.predicted_line
    correct = predicted is not None and predicted == task.ground_truth_line
    near = predicted is not None and abs(predicted - task.ground_truth_line) <= tolerance
    first = task.steps[0] if task.steps else None
    return ScoreRecord(
        task_id=task.task_id,
        model_name=answer.model_name,
        model_category=model_category,
        phase=task.phase,
        correct=correct,
        parsed=predicted is not None,
        within_tolerance=near,
        predicted_line=predicted,
        ground_truth_line=task.ground_truth_line,
        seed_id=task.seed_id,
        fault_id=task.fault_id,
        mutant_id=task.mutant_id,
        subject_language=task.subject_language,
        fault_kind=task.fault_kind,
        fault_quartile=task.fault_quartile,
        killed=killed,
        plan=task.plan,
        strength=first.strength if first else None,
        spm_quartile=first.quartile if first else None,
        effective_strengths=tuple(step.effective_strength for step in task.steps),
    )


def score_answers(
    tasks: Sequence[FaultLocTask],
    answers: Sequence[ModelAnswer],
    tolerance: int = 0,
    categories: Optional[Mapping[str, Optional[str]]] = None,
    killed: Optional[Mapping[str, Optional[bool]]] = None,
) -> List[ScoreRecord]:
    """
    Scores every answered task, in answer order. Skipped answers and answers to unknown tasks
    produce no score.
    """
    by_id = {task.task_id: task for task in tasks}
    scores: List[ScoreRecord] = []
    for answer in answers:
        task = by_id.get(answer.task_id)
        if task is None or answer.status == AnswerStatus.skipped:
            continue
        category = (categories or {}).get(answer.model_name)
        fault_killed = (killed or {}).get(task.fault_id)
        scores.append(score_answer(task, answer, tolerance, category, fault_killed))
    logger.info(f"Scored {len(scores)} of {len(answers)} answers")
    return scores
