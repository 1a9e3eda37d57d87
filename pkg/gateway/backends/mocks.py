"""
This module contains the mock backends used to check the pipeline end to end.
"""

import logging
from typing import Optional

from gateway.backends.base import ModelBackend
from gateway.models import BackendResponse, FaultLocTask
from source_model.models import Quartile
from source_model.utils import quartile_bounds, stable_rng

logger = logging.getLogger(__name__)


def _marker(line: int) -> BackendResponse:
    return BackendResponse(text=f"FAULT_LINE: {line}")


class OracleBackend(ModelBackend):
    """
    Answers with the ground-truth line read from the task sidecar.
    """

    async def complete(self, prompt: str, task: Optional[FaultLocTask] = None) -> BackendResponse:
        if task is None:
            return BackendResponse(text="")
        return _marker(task.ground_truth_line)


class UniformRandomBackend(ModelBackend):
    """
    Answers with a line drawn uniformly from the program, fixed per (seed, task).
    """

    async def complete(self, prompt: str, task: Optional[FaultLocTask] = None) -> BackendResponse:
        if task is None:
            return BackendResponse(text="")
        rng = stable_rng("mock-random", self.spec.mock_seed, task.task_id)
        return _marker(int(rng.integers(1, task.line_count + 1)))


class FirstQuartileBiasedBackend(ModelBackend):
    """
    Answers inside the first quartile with probability `mock_bias`, elsewhere otherwise.
    """

    async def complete(self, prompt: str, task: Optional[FaultLocTask] = None) -> BackendResponse:
        if task is None:
            return BackendResponse(text="")
        rng = stable_rng("mock-q1", self.spec.mock_seed, task.task_id)
        _, q1_end = quartile_bounds(Quartile.Q1, task.line_count)
        if q1_end >= task.line_count or rng.random() < self.spec.mock_bias:
            return _marker(int(rng.integers(1, q1_end + 1)))
        return _marker(int(rng.integers(q1_end + 1, task.line_count + 1)))
