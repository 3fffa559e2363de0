"""HTTP face of the fusion store: ingestion endpoints, range queries, /metrics."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from ..records import (
    FieldRangeError,
    LinkSample,
    QoeScore,
    RadioSample,
    SegmentRecord,
    SessionEvent,
)
from .store import FusionStore, SeriesKey

INGEST_TYPES = {
    "radio": RadioSample,
    "link": LinkSample,
    "segment": SegmentRecord,
    "qoe": QoeScore,
    "session": SessionEvent,
}


def make_handler(store: FusionStore):
    class FusionHandler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            pass

        def _send_json(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self):
            parts = self.path.rstrip("/").split("/")
            if len(parts) == 3 and parts[1] == "ingest" and parts[2] in INGEST_TYPES:
                length = int(self.headers.get("Content-Length", "0"))
                try:
                    payload = json.loads(self.rfile.read(length))
                    record = INGEST_TYPES[parts[2]].from_json_dict(payload)
                except FieldRangeError as exc:
                    self._send_json(400, {"error": str(exc), "field": exc.field})
                    return
                except (ValueError, KeyError) as exc:
                    self._send_json(400, {"error": f"bad payload: {exc}"})
                    return
                if isinstance(record, SessionEvent):
                    ack = store.ingest_session_event(record)
                else:
                    try:
                        ack = store.ingest(record)
                    except FieldRangeError as exc:
                        self._send_json(400, {"error": str(exc), "field": exc.field})
                        return
                self._send_json(200, {"stored": ack.stored, "duplicate": ack.duplicate})
                return
            self._send_json(404, {"error": f"no such endpoint: {self.path}"})

        def do_GET(self):
            url = urlsplit(self.path)
            if url.path == "/metrics":
                body = store.exposition().encode()
                self.send_response(200)
                self.send_header("Content-Type", "text/plain; version=0.0.4")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
                return
            if url.path == "/query":
                q = parse_qs(url.query)
                try:
                    key = SeriesKey(
                        layer=q["layer"][0],
                        metric=q["metric"][0],
                        session_id=q.get("session", [None])[0] or None,
                    )
                    result = store.query_range(
                        key,
                        t0=float(q["t0"][0]),
                        t1=float(q["t1"][0]),
                        step_s=float(q.get("step", ["1"])[0]),
                    )
                except (KeyError, ValueError) as exc:
                    self._send_json(400, {"error": f"bad query: {exc}"})
                    return
                self._send_json(
                    200,
                    {
                        "points": [[t, v] for t, v in result.points],
                        "unknown_series": result.unknown_series,
                    },
                )
                return
            if url.path == "/healthz":
                self._send_json(200, {"ok": True})
                return
            self._send_json(404, {"error": f"no such endpoint: {self.path}"})

    return FusionHandler


class FusionServer:
    """Threaded HTTP server wrapping a FusionStore; use as a context manager."""

    def __init__(self, store: FusionStore, listen: str = "127.0.0.1:0"):
        host, _, port = listen.rpartition(":")
        self.store = store
        self._httpd = ThreadingHTTPServer((host or "127.0.0.1", int(port)), make_handler(store))
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "FusionServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "FusionServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
