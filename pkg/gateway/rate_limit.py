import asyncio
import time
from typing import Callable, Optional


class TokenBucket:
    """
    Requests-per-minute limiter. The bucket holds up to `burst` tokens and refills
    continuously; `acquire` waits until a token is available.
    """

    def __init__(
        self,
        requests_per_minute: float,
        burst: Optional[float] = None,
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        self._rate = requests_per_minute / 60.0
        self._capacity = burst if burst is not None else max(1.0, min(requests_per_minute, 10.0))
        self._tokens = self._capacity
        self._clock = clock
        self._updated = clock()
        self._lock = asyncio.Lock()

    def _refill(self) -> None:
        now = self._clock()
        self._tokens = min(self._capacity, self._tokens + (now - self._updated) * self._rate)
        self._updated = now

    def wait_time(self) -> float:
        """
        Seconds until the next token, 0 when one is available now.
        """
        self._refill()
        if self._tokens >= 1:
            return 0.0
        return (1 - self._tokens) / self._rate

    async def acquire(self) -> None:
        async with self._lock:
            delay = self.wait_time()
            while delay > 0:
                await asyncio.sleep(delay)
                delay = self.wait_time()
            self._tokens -= 1
