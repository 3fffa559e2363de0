"""Interposing media proxy: the edge node between DASH players and the origin.

Serves manifests with their BaseURL rewritten to this proxy, relays segment
bytes unmodified as they arrive from the origin, tracks player sessions, and
emits one segment record per completed request to the fusion sink. Relay
timestamps come from the injected clock; the replay harness supplies a
simulated clock and a pacing hook, live deployments use the wall-aligned
monotonic clock and no pacer.
"""

from __future__ import annotations

import threading
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional, Protocol
from urllib.parse import urlsplit

from .clock import LiveClock
from .fusion.client import FusionClient, IngestError
from .fusion.store import FusionStore
from .mpd import Manifest, MpdError, parse_mpd, rewrite_base_url, serialize_mpd, template_matcher
from .records import SegmentRecord, SessionEvent

CHUNK_SIZE = 64 * 1024
DEFAULT_SESSION_TIMEOUT_S = 30.0


class RecordSink(Protocol):
    def emit_segment(self, record: SegmentRecord) -> None: ...

    def emit_session(self, event: SessionEvent) -> None: ...


class NullSink:
    def emit_segment(self, record: SegmentRecord) -> None:
        pass

    def emit_session(self, event: SessionEvent) -> None:
        pass


class StoreSink:
    """Direct in-process ingestion (harness and tests)."""

    def __init__(self, store: FusionStore):
        self.store = store

    def emit_segment(self, record: SegmentRecord) -> None:
        self.store.ingest(record)

    def emit_session(self, event: SessionEvent) -> None:
        self.store.ingest_session_event(event)


class HttpSink:
    """POSTs records to a fusion server; emission failures must not break relay."""

    def __init__(self, fusion_url: str):
        self._client = FusionClient(fusion_url)
        self.errors = 0

    def emit_segment(self, record: SegmentRecord) -> None:
        try:
            self._client.ingest("segment", record.to_json_dict())
        except IngestError:
            self.errors += 1

    def emit_session(self, event: SessionEvent) -> None:
        try:
            self._client.ingest("session", event.to_json_dict())
        except IngestError:
            self.errors += 1


class Pacer(Protocol):
    """Relay pacing hook; accounts wire bytes and advances simulated time."""

    def account(self, nbytes: int) -> None: ...


@dataclass
class Session:
    session_id: str
    client_key: str
    client_ip: str
    mpd_path: str
    manifest_dir: str
    opened_at: float
    last_activity: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class MediaProxy:
    def __init__(
        self,
        origin: str,
        sink: Optional[RecordSink] = None,
        clock=None,
        session_timeout_s: float = DEFAULT_SESSION_TIMEOUT_S,
        pacer: Optional[Pacer] = None,
        listen: str = "127.0.0.1:0",
        origin_timeout_s: float = 10.0,
    ):
        self.origin = origin.rstrip("/")
        self.sink = sink or NullSink()
        self.clock = clock or LiveClock()
        self.session_timeout_s = session_timeout_s
        self.pacer = pacer
        self.origin_timeout_s = origin_timeout_s

        self._lock = threading.RLock()
        self._sessions: dict[str, Session] = {}
        self._manifests: dict[str, tuple[Manifest, "re.Pattern"]] = {}
        self._session_seq = 0

        host, _, port = listen.rpartition(":")
        proxy = self

        class ProxyHandler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):
                pass

            def do_GET(self):
                proxy._handle(self)

        self._httpd = ThreadingHTTPServer((host or "127.0.0.1", int(port)), ProxyHandler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    # -- lifecycle ---------------------------------------------------------

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "MediaProxy":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "MediaProxy":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    # -- session table -----------------------------------------------------

    def expire_sessions(self, now: Optional[float] = None) -> list[str]:
        """Close sessions idle beyond the timeout; returns their ids."""
        now = self.clock.now() if now is None else now
        closed = []
        with self._lock:
            for key in list(self._sessions):
                s = self._sessions[key]
                if now - s.last_activity > self.session_timeout_s:
                    del self._sessions[key]
                    closed.append(s.session_id)
                    self.sink.emit_session(
                        SessionEvent("close", s.session_id, s.client_key, s.mpd_path, now)
                    )
        return closed

    def close_all_sessions(self, now: Optional[float] = None) -> list[str]:
        now = self.clock.now() if now is None else now
        with self._lock:
            closed = []
            for key in list(self._sessions):
                s = self._sessions.pop(key)
                closed.append(s.session_id)
                self.sink.emit_session(
                    SessionEvent("close", s.session_id, s.client_key, s.mpd_path, now)
                )
            return closed

    def open_sessions(self) -> list[Session]:
        with self._lock:
            return list(self._sessions.values())

    def _open_or_refresh_session(self, client_ip: str, mpd_path: str, manifest_dir: str, now: float) -> Session:
        key = f"{client_ip}|{mpd_path}"
        with self._lock:
            existing = self._sessions.get(key)
            if existing is not None:
                if now - existing.last_activity <= self.session_timeout_s:
                    existing.last_activity = now
                    return existing
                del self._sessions[key]
                self.sink.emit_session(
                    SessionEvent("close", existing.session_id, key, mpd_path, now)
                )
            self._session_seq += 1
            session = Session(
                session_id=f"s{self._session_seq:04d}",
                client_key=key,
                client_ip=client_ip,
                mpd_path=mpd_path,
                manifest_dir=manifest_dir,
                opened_at=now,
                last_activity=now,
            )
            self._sessions[key] = session
            self.sink.emit_session(SessionEvent("open", session.session_id, key, mpd_path, now))
            return session

    def _find_session(self, client_ip: str, manifest_dir: str) -> Optional[Session]:
        with self._lock:
            for s in self._sessions.values():
                if s.client_ip == client_ip and s.manifest_dir == manifest_dir:
                    return s
        return None

    # -- request handling ----------------------------------------------------

    def _handle(self, handler: BaseHTTPRequestHandler) -> None:
        path = urlsplit(handler.path).path
        try:
            if path.endswith(".mpd"):
                self._handle_manifest(handler, path)
            else:
                self._handle_segment(handler, path)
        except (BrokenPipeError, ConnectionResetError):
            pass

    def _handle_manifest(self, handler: BaseHTTPRequestHandler, path: str) -> None:
        try:
            with urllib.request.urlopen(self.origin + path, timeout=self.origin_timeout_s) as resp:
                body = resp.read()
        except urllib.error.HTTPError as exc:
            self._send(handler, exc.code, exc.read(), "text/plain")
            return
        except (urllib.error.URLError, OSError) as exc:
            self._send(handler, 502, f"origin unreachable: {exc}".encode(), "text/plain")
            return

        try:
            manifest = parse_mpd(body)
        except MpdError as exc:
            self._send(handler, 502, f"upstream manifest invalid: {exc}".encode(), "text/plain")
            return

        host = handler.headers.get("Host") or "{}:{}".format(*self._httpd.server_address[:2])
        rewritten = rewrite_base_url(manifest, f"http://{host}/")
        manifest_dir = urlsplit(rewritten.base_url).path
        with self._lock:
            self._manifests[manifest_dir] = (manifest, template_matcher(manifest.segment_template))

        now = self.clock.now()
        self._open_or_refresh_session(handler.client_address[0], path, manifest_dir, now)
        self._send(handler, 200, serialize_mpd(rewritten), "application/dash+xml")

    def _handle_segment(self, handler: BaseHTTPRequestHandler, path: str) -> None:
        t_request = self.clock.now()
        resolved = self._resolve_segment(path)

        status = 200
        relayed = 0
        t_first_byte = None
        try:
            resp = urllib.request.urlopen(self.origin + path, timeout=self.origin_timeout_s)
        except urllib.error.HTTPError as exc:
            status = exc.code
            body = exc.read()
            handler.send_response(status)
            handler.send_header("Content-Length", str(len(body)))
            handler.end_headers()
            if body:
                if self.pacer is not None:
                    self.pacer.account(len(body))
                handler.wfile.write(body)
                relayed = len(body)
            t_first_byte = self.clock.now()
        except (urllib.error.URLError, OSError) as exc:
            status = 502
            self._send(handler, status, f"origin unreachable: {exc}".encode(), "text/plain")
            t_first_byte = self.clock.now()
        else:
            with resp:
                status = resp.status
                length = resp.headers.get("Content-Length")
                handler.send_response(status)
                handler.send_header(
                    "Content-Type", resp.headers.get("Content-Type", "application/octet-stream")
                )
                if length is not None:
                    handler.send_header("Content-Length", length)
                else:
                    handler.send_header("Connection", "close")
                handler.end_headers()
                while True:
                    chunk = resp.read(CHUNK_SIZE)
                    if not chunk:
                        break
                    if self.pacer is not None:
                        self.pacer.account(len(chunk))
                    handler.wfile.write(chunk)
                    relayed += len(chunk)
                    if t_first_byte is None:
                        t_first_byte = self.clock.now()
                if length is None:
                    handler.close_connection = True
        t_complete = self.clock.now()
        if t_first_byte is None:
            t_first_byte = t_complete

        if resolved is None:
            return
        manifest, manifest_dir, rep_id, index = resolved
        session = self._find_session(handler.client_address[0], manifest_dir)
        if session is None:
            session_id = f"orphan-{handler.client_address[0]}|{manifest_dir}"
            lock = threading.Lock()
        else:
            session_id = session.session_id
            lock = session.lock
        try:
            rep_bitrate = manifest.representation(rep_id).bitrate_kbps
        except MpdError:
            rep_bitrate = 0.0
        record = SegmentRecord(
            session_id=session_id,
            rep_id=rep_id,
            rep_bitrate_kbps=rep_bitrate,
            segment_index=index,
            bytes=relayed,
            t_request=t_request,
            t_first_byte=t_first_byte,
            t_complete=t_complete,
            origin_status=status,
        )
        with lock:
            if session is not None:
                session.last_activity = t_complete
            self.sink.emit_segment(record)

    def _resolve_segment(self, path: str):
        """(manifest, dir, rep_id, index) when the path belongs to a known manifest."""
        with self._lock:
            candidates = sorted(self._manifests, key=len, reverse=True)
            for mdir in candidates:
                if path.startswith(mdir):
                    manifest, matcher = self._manifests[mdir]
                    m = matcher.match(path[len(mdir):])
                    if m:
                        return manifest, mdir, m.group("rep"), int(m.group("num"))
        return None

    @staticmethod
    def _send(handler: BaseHTTPRequestHandler, status: int, body: bytes, ctype: str) -> None:
        handler.send_response(status)
        handler.send_header("Content-Type", ctype)
        handler.send_header("Content-Length", str(len(body)))
        handler.end_headers()
        handler.wfile.write(body)
