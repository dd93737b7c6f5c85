"""Sliding-window request budgets for the rate-limited OSINT APIs."""
from __future__ import annotations

from collections import deque

from .transport import Clock


class RateBudget:
    """Allows at most `capacity` grants inside any sliding window.

    acquire() blocks (via the injected clock) until issuing one more
    request cannot exceed the budget, then records the grant. Pacing is
    therefore as smooth as the caller allows while the hard window
    invariant always holds.
    """

    def __init__(self, capacity: int, window_seconds: float, clock: Clock):
        if capacity < 1 or window_seconds <= 0:
            raise ValueError("capacity must be >= 1 and window > 0")
        self.capacity = capacity
        self.window_seconds = window_seconds
        self._clock = clock
        self._grants: deque[float] = deque()
        self.spent = 0

    def _evict(self, now: float) -> None:
        horizon = now - self.window_seconds
        while self._grants and self._grants[0] <= horizon:
            self._grants.popleft()

    def acquire(self) -> float:
        """Block until a request is allowed; returns the seconds waited."""
        waited = 0.0
        now = self._clock.now().timestamp()
        self._evict(now)
        while len(self._grants) >= self.capacity:
            wait = self._grants[0] + self.window_seconds - now
            wait = max(wait, 1e-6)
            self._clock.sleep(wait)
            waited += wait
            now = self._clock.now().timestamp()
            self._evict(now)
        self._grants.append(now)
        self.spent += 1
        return waited

    def would_wait(self) -> float:
        """Seconds a call to acquire() would block right now."""
        now = self._clock.now().timestamp()
        self._evict(now)
        if len(self._grants) < self.capacity:
            return 0.0
        return max(self._grants[0] + self.window_seconds - now, 0.0)
