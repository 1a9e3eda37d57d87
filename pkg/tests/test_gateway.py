import asyncio
import json
from typing import List, Optional

import httpx
import numpy as np
import pytest

from faults.models import FaultKind
from gateway.backends.base import ModelBackend
from gateway.backends.remote import LocalRuntimeBackend, RemoteApiBackend
from gateway.dispatcher import ModelGateway
from gateway.errors import AuthMissingError, TransientProviderError, UnknownModelError
from gateway.models import (
    AnswerStatus,
    ApiStyle,
    BackendResponse,
    FaultLocTask,
    MockKind,
    ModelAnswer,
    ModelSpec,
    Phase,
    ProviderKind,
)
from gateway.prompts import build_prompt, parse_answer
from gateway.rate_limit import TokenBucket
from source_model.models import Quartile, SubjectLanguage

SOURCE = "def f(x):\n    return x + 1\n\n\nprint(f(2))\n"


def _task(number: int, ground_truth: int = 2, source: str = SOURCE) -> FaultLocTask:
    return FaultLocTask(
        task_id=f"t{number}",
        phase=Phase.baseline,
        source_text=source,
        spec_text="Print one more than two.",
        subject_language=SubjectLanguage.PY,
        ground_truth_line=ground_truth,
        line_count=source.count("\n"),
        seed_id="s",
        fault_id=f"f{number}",
        fault_kind=FaultKind.operator_swap,
        fault_quartile=Quartile.Q2,
    )


async def _no_sleep(delay: float) -> None:
    return None


def test_build_prompt() -> None:
    prompt = build_prompt(_task(0))
    assert "specification: Print one more than two." in prompt
    assert "```python\ndef f(x):\n    return x + 1\n\n\nprint(f(2))\n```" in prompt
    assert "FAULT_LINE: <integer>" in prompt
    assert "1 |" not in prompt


@pytest.mark.parametrize(
    "reply, expected",
    [
        ("The addition is wrong.\nFAULT_LINE: 2", 2),
        ("Maybe line 3? Actually no.\nFAULT_LINE: 4\nFAULT_LINE: 5", 5),
        ("FAULT_LINE = **4**", 4),
        ("The bug is on line 3.", 3),
        ("FAULT_LINE: 99", None),
        ("FAULT_LINE: 0", None),
        ("I cannot tell.", None),
    ],
    ids=[
        "marker",
        "last_marker_wins",
        "bold_marker",
        "line_mention",
        "past_end",
        "zero",
        "no_line",
    ],
)
def test_parse_answer(reply: str, expected: Optional[int]) -> None:
    assert parse_answer(reply, 5) == expected


def test_token_bucket() -> None:
    now = [0.0]
    bucket = TokenBucket(60, burst=1, clock=lambda: now[0])
    asyncio.run(bucket.acquire())
    assert bucket.wait_time() == pytest.approx(1.0)
    now[0] = 0.5
    assert bucket.wait_time() == pytest.approx(0.5)
    now[0] = 1.0
    assert bucket.wait_time() == 0.0


def test_mock_models() -> None:
    gateway = ModelGateway(parallel=2)
    tasks = [_task(n, ground_truth=1 + n % 5) for n in range(12)]

    oracle = gateway.evaluate("mock:oracle", tasks)
    assert [a.predicted_line for a in oracle] == [t.ground_truth_line for t in tasks]
    assert all(a.status == AnswerStatus.answered for a in oracle)

    first = gateway.evaluate("mock:random", tasks)
    second = gateway.evaluate("mock:random", tasks)
    assert [a.predicted_line for a in first] == [a.predicted_line for a in second]
    assert all(a.predicted_line is not None and 1 <= a.predicted_line <= 5 for a in first)


def test_random_mock_is_uniform() -> None:
    draws = 10_000
    tasks = [_task(n) for n in range(draws)]
    answers = ModelGateway(parallel=8).evaluate("mock:random", tasks)
    lines = np.array([a.predicted_line for a in answers])
    assert lines.min() == 1 and lines.max() == 5
    # uniform over 1..5: mean 3, variance 2
    assert abs(lines.mean() - 3.0) <= 3 * np.sqrt(2.0 / draws)
    counts = np.bincount(lines, minlength=6)[1:]
    sigma = np.sqrt(draws * 0.2 * 0.8)
    assert np.all(np.abs(counts - draws * 0.2) <= 4 * sigma)


def test_first_quartile_biased_mock() -> None:
    spec = ModelSpec(
        model_name="biased",
        provider=ProviderKind.mock,
        mock_kind=MockKind.first_quartile_biased,
        mock_bias=1.0,
    )
    source = "".join(f"x{n} = {n}\n" for n in range(40))
    tasks = [_task(n, source=source) for n in range(20)]
    answers = ModelGateway([spec]).evaluate("biased", tasks)
    assert all(a.predicted_line is not None and a.predicted_line <= 10 for a in answers)


def test_unknown_model() -> None:
    with pytest.raises(UnknownModelError):
        ModelGateway().resolve("nobody")


def test_context_limit_skips() -> None:
    spec = ModelSpec(
        model_name="tiny",
        provider=ProviderKind.mock,
        mock_kind=MockKind.oracle,
        context_limit_tokens=10,
    )
    (answer,) = ModelGateway([spec]).evaluate("tiny", [_task(0)])
    assert answer.status == AnswerStatus.skipped
    assert answer.predicted_line is None


def test_batches_are_reported() -> None:
    batches: List[List[ModelAnswer]] = []
    answers = ModelGateway(parallel=1).evaluate(
        "mock:oracle", [_task(n) for n in range(10)], on_batch=batches.append
    )
    assert [len(batch) for batch in batches] == [8, 2]
    assert [a.task_id for batch in batches for a in batch] == [a.task_id for a in answers]


class FlakyBackend(ModelBackend):
    def __init__(self, spec: ModelSpec, failures: int) -> None:
        super().__init__(spec)
        self.failures = failures
        self.calls = 0

    async def complete(self, prompt: str, task: Optional[FaultLocTask] = None) -> BackendResponse:
        self.calls += 1
        if self.calls <= self.failures:
            raise TransientProviderError("HTTP 503")
        return BackendResponse(text="FAULT_LINE: 2", latency_ms=5)


@pytest.mark.parametrize(
    "failures, answered, delays",
    [(2, True, [1.0, 2.0]), (5, False, [1.0, 2.0])],
    ids=["recovers", "gives_up"],
)
def test_retries_with_backoff(failures: int, answered: bool, delays: List[float]) -> None:
    spec = ModelSpec(
        model_name="flaky",
        provider=ProviderKind.mock,
        mock_kind=MockKind.oracle,
        max_retries=2,
        backoff_s=1.0,
    )
    slept: List[float] = []

    async def sleep(delay: float) -> None:
        slept.append(delay)

    gateway = ModelGateway(
        [spec], sleep=sleep, backend_factory=lambda s: FlakyBackend(s, failures)
    )
    answers = gateway.evaluate("flaky", [_task(0)])
    assert slept == delays
    if answered:
        assert answers[0].predicted_line == 2
        assert answers[0].attempts == 3
        assert answers[0].latency_ms == 5
    else:
        assert answers == []


def _remote_spec(style: ApiStyle = ApiStyle.openai_chat) -> ModelSpec:
    return ModelSpec(
        model_name="hosted",
        provider=ProviderKind.remote_api,
        endpoint="https://api.example.test/v1/chat",
        model_id="model-x",
        api_style=style,
        credential_env="FLB_TEST_KEY",
        backoff_s=0.0,
    )


def test_remote_openai_style(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("FLB_TEST_KEY", "secret")
    seen: List[httpx.Request] = []
    statuses = [429, 200]

    def handler(request: httpx.Request) -> httpx.Response:
        seen.append(request)
        status = statuses.pop(0)
        if status != 200:
            return httpx.Response(status, text="slow down")
        body = {
            "choices": [{"message": {"content": "FAULT_LINE: 2"}}],
            "usage": {"prompt_tokens": 50, "completion_tokens": 4},
        }
        return httpx.Response(200, json=body)

    def factory(spec: ModelSpec) -> ModelBackend:
        client = httpx.AsyncClient(transport=httpx.MockTransport(handler))
        return RemoteApiBackend(spec, client=client)

    gateway = ModelGateway([_remote_spec()], sleep=_no_sleep, backend_factory=factory)
    (answer,) = gateway.evaluate("hosted", [_task(0)])
    assert answer.predicted_line == 2
    assert answer.prompt_tokens == 50
    assert answer.completion_tokens == 4
    assert answer.attempts == 2
    assert seen[-1].headers["Authorization"] == "Bearer secret"
    payload = json.loads(seen[-1].content)
    assert payload["model"] == "model-x"
    assert payload["temperature"] == 0.0


def test_remote_anthropic_style(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("FLB_TEST_KEY", "secret")

    def handler(request: httpx.Request) -> httpx.Response:
        assert request.headers["x-api-key"] == "secret"
        assert "anthropic-version" in request.headers
        body = {
            "content": [{"type": "text", "text": "FAULT_LINE: 5"}],
            "usage": {"input_tokens": 40, "output_tokens": 3},
        }
        return httpx.Response(200, json=body)

    def factory(spec: ModelSpec) -> ModelBackend:
        client = httpx.AsyncClient(transport=httpx.MockTransport(handler))
        return RemoteApiBackend(spec, client=client)

    gateway = ModelGateway([_remote_spec(ApiStyle.anthropic_messages)], backend_factory=factory)
    (answer,) = gateway.evaluate("hosted", [_task(0)])
    assert answer.predicted_line == 5
    assert answer.prompt_tokens == 40


def test_remote_context_overflow_skips(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("FLB_TEST_KEY", "secret")

    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(400, text="This model's maximum context length is 10 tokens")

    def factory(spec: ModelSpec) -> ModelBackend:
        client = httpx.AsyncClient(transport=httpx.MockTransport(handler))
        return RemoteApiBackend(spec, client=client)

    gateway = ModelGateway([_remote_spec()], backend_factory=factory)
    (answer,) = gateway.evaluate("hosted", [_task(0)])
    assert answer.status == AnswerStatus.skipped


def test_remote_requires_credential(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("FLB_TEST_KEY", raising=False)
    with pytest.raises(AuthMissingError):
        RemoteApiBackend(_remote_spec())


def test_local_runtime() -> None:
    spec = ModelSpec(
        model_name="local",
        provider=ProviderKind.local_runtime,
        endpoint="http://localhost:11434/",
        model_id="coder:7b",
    )

    def handler(request: httpx.Request) -> httpx.Response:
        assert str(request.url) == "http://localhost:11434/api/generate"
        assert json.loads(request.content)["stream"] is False
        return httpx.Response(
            200, json={"response": "line 1 looks fine. FAULT_LINE: 2", "eval_count": 7}
        )

    def factory(spec: ModelSpec) -> ModelBackend:
        client = httpx.AsyncClient(transport=httpx.MockTransport(handler))
        return LocalRuntimeBackend(spec, client=client)

    gateway = ModelGateway([spec], backend_factory=factory)
    (answer,) = gateway.evaluate("local", [_task(0)])
    assert answer.predicted_line == 2
    assert answer.completion_tokens == 7
    assert gateway.ask("local", "hello") == "line 1 looks fine. FAULT_LINE: 2"


def test_profile_needs_endpoint() -> None:
    with pytest.raises(ValueError):
        ModelSpec(model_name="hosted", provider=ProviderKind.remote_api)
