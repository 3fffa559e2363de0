"""At-least-once publishing of observations to the fusion ingestion endpoints.

A bounded FIFO absorbs endpoint outages; when full, the oldest entries are
dropped and counted. A single worker preserves per-publisher ordering, and
the fusion store's (source, timestamp) dedup makes redelivery harmless.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass

from ..fusion.client import FusionClient, IngestError
from ..records import LinkSample, QoeScore, RadioSample, SegmentRecord

_KINDS = {
    RadioSample: "radio",
    LinkSample: "link",
    SegmentRecord: "segment",
    QoeScore: "qoe",
}


@dataclass
class PublisherStats:
    published: int = 0
    dropped_overflow: int = 0
    rejected: int = 0
    retries: int = 0


class Publisher:
    def __init__(
        self,
        client: FusionClient,
        queue_limit: int = 10000,
        retry_interval_s: float = 0.2,
    ):
        self._client = client
        self._queue: deque = deque()
        self._queue_limit = queue_limit
        self._retry_interval_s = retry_interval_s
        self._lock = threading.Lock()
        self._wakeup = threading.Event()
        self._stop = False
        self.stats = PublisherStats()
        self._worker = threading.Thread(target=self._run, daemon=True)
        self._worker.start()

    def publish(self, record) -> None:
        kind = _KINDS.get(type(record))
        if kind is None:
            raise TypeError(f"cannot publish {type(record).__name__}")
        with self._lock:
            if len(self._queue) >= self._queue_limit:
                self._queue.popleft()
                self.stats.dropped_overflow += 1
            self._queue.append((kind, record.to_json_dict()))
        self._wakeup.set()

    def pending(self) -> int:
        with self._lock:
            return len(self._queue)

    def flush(self, timeout_s: float = 30.0) -> bool:
        """Block until the queue drains (True) or the timeout expires (False)."""
        deadline = threading.Event()
        waited = 0.0
        while waited < timeout_s:
            if self.pending() == 0:
                return True
            deadline.wait(0.05)
            waited += 0.05
        return self.pending() == 0

    def close(self, timeout_s: float = 30.0) -> bool:
        drained = self.flush(timeout_s)
        self._stop = True
        self._wakeup.set()
        self._worker.join(timeout=5.0)
        return drained

    def _run(self) -> None:
        while not self._stop:
            with self._lock:
                head = self._queue[0] if self._queue else None
            if head is None:
                self._wakeup.wait(timeout=0.5)
                self._wakeup.clear()
                continue
            kind, payload = head
            try:
                self._client.ingest(kind, payload)
            except IngestError as exc:
                if exc.retryable:
                    self.stats.retries += 1
                    self._wakeup.wait(timeout=self._retry_interval_s)
                    self._wakeup.clear()
                    continue
                self.stats.rejected += 1
            else:
                self.stats.published += 1
            with self._lock:
                if self._queue and self._queue[0] is head:
                    self._queue.popleft()
