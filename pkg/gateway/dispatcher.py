"""
This module contains the model gateway, which resolves model names to backends and dispatches
fault-localization prompts with bounded concurrency, rate limits and retries.
"""

import asyncio
import logging
from typing import Awaitable, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from gateway.backends.base import ModelBackend
from gateway.backends.mocks import (
    FirstQuartileBiasedBackend,
    OracleBackend,
    UniformRandomBackend,
)
from gateway.backends.remote import LocalRuntimeBackend, RemoteApiBackend
from gateway.errors import (
    ContextOverflowError,
    ProviderError,
    TransientProviderError,
    UnknownModelError,
)
from gateway.models import (
    AnswerStatus,
    BackendResponse,
    FaultLocTask,
    MockKind,
    ModelAnswer,
    ModelSpec,
    ProviderKind,
)
from gateway.prompts import build_prompt, parse_answer
from gateway.rate_limit import TokenBucket
from source_model.utils import estimate_tokens

logger = logging.getLogger(__name__)

BUILTIN_MOCKS: Dict[str, ModelSpec] = {
    "mock:oracle": ModelSpec(
        model_name="mock:oracle", provider=ProviderKind.mock, mock_kind=MockKind.oracle
    ),
    "mock:random": ModelSpec(
        model_name="mock:random", provider=ProviderKind.mock, mock_kind=MockKind.uniform_random
    ),
    "mock:q1-biased": ModelSpec(
        model_name="mock:q1-biased",
        provider=ProviderKind.mock,
        mock_kind=MockKind.first_quartile_biased,
    ),
}
MOCK_BACKENDS = {
    MockKind.oracle: OracleBackend,
    MockKind.uniform_random: UniformRandomBackend,
    MockKind.first_quartile_biased: FirstQuartileBiasedBackend,
}

Sleep = Callable[[float], Awaitable[None]]


def create_backend(spec: ModelSpec) -> ModelBackend:
    if spec.provider == ProviderKind.mock:
        assert spec.mock_kind is not None
        return MOCK_BACKENDS[spec.mock_kind](spec)
    if spec.provider == ProviderKind.local_runtime:
        return LocalRuntimeBackend(spec)
    return RemoteApiBackend(spec)


class _Limits:
    """
    Per-model concurrency and rate state, created inside the running event loop.
    """

    def __init__(self, spec: ModelSpec, parallel: int) -> None:
        self.semaphore = asyncio.Semaphore(min(parallel, spec.max_concurrent))
        self.bucket: Optional[TokenBucket] = None
        if spec.requests_per_minute is not None:
            self.bucket = TokenBucket(spec.requests_per_minute)


class ModelGateway:
    """
    Sends tasks to models. Answers come back in task order; tasks whose prompt exceeds the
    model's context limit are answered with status `skipped`, and tasks that fail after all
    retries are left unanswered so a later run can retry them.
    """

    def __init__(
        self,
        profiles: Sequence[ModelSpec] = (),
        parallel: int = 4,
        chars_per_token: int = 4,
        sleep: Sleep = asyncio.sleep,
        backend_factory: Callable[[ModelSpec], ModelBackend] = create_backend,
    ) -> None:
        self._specs: Dict[str, ModelSpec] = dict(BUILTIN_MOCKS)
        self._specs.update({spec.model_name: spec for spec in profiles})
        self.parallel = max(1, parallel)
        self._chars_per_token = chars_per_token
        self._sleep = sleep
        self._backend_factory = backend_factory

    @property
    def specs(self) -> Mapping[str, ModelSpec]:
        return self._specs

    def resolve(self, model_name: str) -> ModelSpec:
        if model_name not in self._specs:
            raise UnknownModelError(
                f"Model '{model_name}' has no profile. Known: {', '.join(sorted(self._specs))}."
            )
        return self._specs[model_name]

    async def query(
        self,
        backend: ModelBackend,
        prompt: str,
        task: Optional[FaultLocTask],
        limits: _Limits,
    ) -> Tuple[BackendResponse, int]:
        """
        Sends one prompt, retrying transient failures with exponential backoff. Returns the
        response and the number of attempts made.
        """
        spec = backend.spec
        attempt = 0
        while True:
            attempt += 1
            async with limits.semaphore:
                if limits.bucket is not None:
                    await limits.bucket.acquire()
                try:
                    return await backend.complete(prompt, task), attempt
                except TransientProviderError as e:
                    if attempt > spec.max_retries:
                        raise ProviderError(
                            f"{spec.model_name}: giving up after {attempt} attempts: {e.message}"
                        )
                    delay = spec.backoff_s * 2 ** (attempt - 1)
                    logger.warning(f"{e.message}; retry {attempt} in {delay:.1f}s")
            await self._sleep(delay)

    async def _answer(
        self, backend: ModelBackend, task: FaultLocTask, limits: _Limits
    ) -> Optional[ModelAnswer]:
        spec = backend.spec
        prompt = build_prompt(task)
        skipped = ModelAnswer(
            task_id=task.task_id, model_name=spec.model_name, status=AnswerStatus.skipped
        )
        limit = spec.context_limit_tokens
        if limit is not None and estimate_tokens(prompt, self._chars_per_token) > limit:
            logger.info(f"Skipping task {task.task_id} for {spec.model_name}: prompt too long")
            return skipped
        try:
            response, attempts = await self.query(backend, prompt, task, limits)
        except ContextOverflowError as e:
            logger.info(f"Skipping task {task.task_id}: {e.message}")
            return skipped
        except ProviderError as e:
            logger.error(f"No answer for task {task.task_id}: {e.message}")
            return None
        return ModelAnswer(
            task_id=task.task_id,
            model_name=spec.model_name,
            raw_text=response.text,
            predicted_line=parse_answer(response.text, task.line_count),
            latency_ms=response.latency_ms,
            prompt_tokens=response.prompt_tokens,
            completion_tokens=response.completion_tokens,
            attempts=attempts,
        )

    async def evaluate_async(
        self,
        model_name: str,
        tasks: Sequence[FaultLocTask],
        on_batch: Optional[Callable[[List[ModelAnswer]], None]] = None,
        batch_size: Optional[int] = None,
    ) -> List[ModelAnswer]:
        spec = self.resolve(model_name)
        backend = self._backend_factory(spec)
        limits = _Limits(spec, self.parallel)
        size = batch_size or self.parallel * 8
        answers: List[ModelAnswer] = []
        try:
            for start in range(0, len(tasks), size):
                batch = tasks[start : start + size]
                results = await asyncio.gather(*(self._answer(backend, t, limits) for t in batch))
                done = [answer for answer in results if answer is not None]
                if on_batch is not None:
                    on_batch(done)
                answers.extend(done)
        finally:
            await backend.aclose()
        logger.info(f"{model_name}: {len(answers)} of {len(tasks)} tasks answered")
        return answers

    def evaluate(
        self,
        model_name: str,
        tasks: Sequence[FaultLocTask],
        on_batch: Optional[Callable[[List[ModelAnswer]], None]] = None,
    ) -> List[ModelAnswer]:
        """
        Answers every task with one model. `on_batch` receives each finished batch in task
        order, so callers can persist progress as it happens.
        """
        return asyncio.run(self.evaluate_async(model_name, tasks, on_batch))

    def ask(self, model_name: str, prompt: str) -> str:
        """
        Sends a free-form prompt and returns the raw reply text.
        """
        spec = self.resolve(model_name)

        async def run() -> str:
            backend = self._backend_factory(spec)
            try:
                response, _ = await self.query(backend, prompt, None, _Limits(spec, 1))
                return response.text
            finally:
                await backend.aclose()

        return asyncio.run(run())
