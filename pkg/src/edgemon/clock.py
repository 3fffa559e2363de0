"""Timeline sources for measurement timestamps.

Durations must come from a monotonic source; the live clock therefore pins a
wall-clock epoch once and advances it monotonically, while the simulated
clock is advanced explicitly by the replay harness.
"""

from __future__ import annotations

import threading
import time


class LiveClock:
    """Wall-aligned, monotonically advancing timestamps."""

    def __init__(self):
        self._epoch = time.time() - time.monotonic()

    def now(self) -> float:
        return self._epoch + time.monotonic()


class SimClock:
    """Simulated seconds, advanced explicitly; never moves backwards."""

    def __init__(self, start: float = 0.0):
        self._t = start
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._t

    def advance(self, dt: float) -> float:
        if dt < 0:
            raise ValueError("cannot advance backwards")
        with self._lock:
            self._t += dt
            return self._t

    def advance_to(self, t: float) -> float:
        with self._lock:
            self._t = max(self._t, t)
            return self._t
