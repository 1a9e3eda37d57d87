"""
Model backend - abstract base class for everything that answers prompts.

Backends wrap remote APIs, local runtimes and test mocks behind one async interface so the
gateway can dispatch to any of them.
"""

from abc import ABC, abstractmethod
from typing import Optional

from gateway.models import BackendResponse, FaultLocTask, ModelSpec


class ModelBackend(ABC):
    """
    Abstract model backend.
    """

    def __init__(self, spec: ModelSpec) -> None:
        self.spec = spec

    @property
    def name(self) -> str:
        return self.spec.model_name

    @abstractmethod
    async def complete(self, prompt: str, task: Optional[FaultLocTask] = None) -> BackendResponse:
        """
        Sends one prompt and returns the raw reply. `task` is only read by mocks.

        Raises TransientProviderError for retryable failures, ProviderError for permanent
        ones and ContextOverflowError when the prompt is too long for the model.
        """
        ...

    async def aclose(self) -> None:
        return None
