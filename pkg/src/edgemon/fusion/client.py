"""Thin HTTP ingestion client for the fusion endpoints."""

from __future__ import annotations

import json
import urllib.error
import urllib.request


class IngestError(Exception):
    def __init__(self, message: str, retryable: bool):
        super().__init__(message)
        self.retryable = retryable


class FusionClient:
    def __init__(self, base_url: str, timeout_s: float = 5.0):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s

    def ingest(self, kind: str, payload: dict) -> dict:
        """POST one record; raises IngestError (retryable for transport faults)."""
        req = urllib.request.Request(
            f"{self.base_url}/ingest/{kind}",
            data=json.dumps(payload).encode(),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                return json.loads(resp.read())
        except urllib.error.HTTPError as exc:
            raise IngestError(f"ingest {kind} rejected: {exc.read().decode(errors='replace')}",
                              retryable=exc.code >= 500) from exc
        except (urllib.error.URLError, OSError, TimeoutError) as exc:
            raise IngestError(f"fusion endpoint unreachable: {exc}", retryable=True) from exc
