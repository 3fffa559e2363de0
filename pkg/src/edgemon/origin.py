"""Fixture media origin: serves an MPD and constant-bitrate synthetic segments.

Segment payloads are deterministic functions of (representation, index) with
size = bitrate * segment_media_duration / 8, so only sizes and timing carry
information. Test hooks allow forcing error statuses on chosen paths.
"""

from __future__ import annotations

import hashlib
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import urlsplit

from .mpd import Manifest, MpdError, parse_mpd, template_matcher


def segment_size_bytes(manifest: Manifest, rep_id: str, index: int) -> int:
    rep = manifest.representation(rep_id)
    return int(round(rep.bitrate_kbps * 1000 * manifest.segment_media_duration(index) / 8))


def segment_payload(manifest: Manifest, rep_id: str, index: int) -> bytes:
    """Deterministic pseudo-media bytes for one segment."""
    size = segment_size_bytes(manifest, rep_id, index)
    pattern = hashlib.sha256(f"{rep_id}:{index}".encode()).digest()
    reps = size // len(pattern) + 1
    return (pattern * reps)[:size]


class OriginServer:
    """Threaded HTTP origin for one manifest; use as a context manager."""

    def __init__(self, mpd_bytes: bytes, mpd_path: str = "/vod/manifest.mpd",
                 listen: str = "127.0.0.1:0"):
        self.mpd_bytes = mpd_bytes
        self.mpd_path = mpd_path
        self.manifest = parse_mpd(mpd_bytes)
        self._matcher = template_matcher(self.manifest.segment_template)
        self._media_dir = urlsplit(self.manifest.base_url).path
        self.fail_with: dict[str, int] = {}
        self.request_log: list[str] = []
        self._log_lock = threading.Lock()

        host, _, port = listen.rpartition(":")
        origin = self

        class OriginHandler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):
                pass

            def do_GET(self):
                origin._handle(self)

        self._httpd = ThreadingHTTPServer((host or "127.0.0.1", int(port)), OriginHandler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "OriginServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "OriginServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def _handle(self, handler: BaseHTTPRequestHandler) -> None:
        path = urlsplit(handler.path).path
        with self._log_lock:
            self.request_log.append(path)

        forced = self.fail_with.get(path)
        if forced is not None:
            body = f"forced status {forced}".encode()
            handler.send_response(forced)
            handler.send_header("Content-Length", str(len(body)))
            handler.end_headers()
            handler.wfile.write(body)
            return

        if path == self.mpd_path:
            handler.send_response(200)
            handler.send_header("Content-Type", "application/dash+xml")
            handler.send_header("Content-Length", str(len(self.mpd_bytes)))
            handler.end_headers()
            handler.wfile.write(self.mpd_bytes)
            return

        if path.startswith(self._media_dir):
            m = self._matcher.match(path[len(self._media_dir):])
            if m:
                rep_id = m.group("rep")
                index = int(m.group("num"))
                try:
                    body = segment_payload(self.manifest, rep_id, index)
                except MpdError:
                    self._not_found(handler, path)
                    return
                handler.send_response(200)
                handler.send_header("Content-Type", "video/iso.segment")
                handler.send_header("Content-Length", str(len(body)))
                handler.end_headers()
                for i in range(0, len(body), 1 << 20):
                    handler.wfile.write(body[i:i + (1 << 20)])
                return
        self._not_found(handler, path)

    @staticmethod
    def _not_found(handler: BaseHTTPRequestHandler, path: str) -> None:
        body = f"no such resource: {path}".encode()
        handler.send_response(404)
        handler.send_header("Content-Length", str(len(body)))
        handler.end_headers()
        handler.wfile.write(body)
