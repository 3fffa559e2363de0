"""Observation records exchanged between collectors and the fusion store.

Each record type validates its invariants at construction and round-trips
through a flat JSON dict (the fusion ingestion wire format and the JSONL
persistence format).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Any, Optional

RSRP_MIN, RSRP_MAX = -156.0, -31.0
RSRQ_MIN, RSRQ_MAX = -43.0, 20.0
SINR_MIN, SINR_MAX = -23.0, 40.0

RADIO_SOURCES = ("modem_log", "trace_file", "simulated")


class FieldRangeError(ValueError):
    """A record field is outside its valid range; ``field`` names it."""

    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


def _check(cond: bool, field: str, message: str) -> None:
    if not cond:
        raise FieldRangeError(field, message)


@dataclass(frozen=True)
class GeoPoint:
    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        _check(abs(self.lat_deg) <= 90.0, "lat_deg", f"latitude {self.lat_deg} outside [-90, 90]")
        _check(abs(self.lon_deg) <= 180.0, "lon_deg", f"longitude {self.lon_deg} outside [-180, 180]")


@dataclass(frozen=True)
class RadioSample:
    """One L1 + GPS observation."""

    t: float
    rsrp_dbm: float
    rsrq_db: float
    sinr_db: float
    position: Optional[GeoPoint] = None
    source: str = "trace_file"

    def __post_init__(self):
        _check(RSRP_MIN <= self.rsrp_dbm <= RSRP_MAX, "rsrp",
               f"rsrp {self.rsrp_dbm} dBm outside [{RSRP_MIN}, {RSRP_MAX}]")
        _check(RSRQ_MIN <= self.rsrq_db <= RSRQ_MAX, "rsrq",
               f"rsrq {self.rsrq_db} dB outside [{RSRQ_MIN}, {RSRQ_MAX}]")
        _check(SINR_MIN <= self.sinr_db <= SINR_MAX, "sinr",
               f"sinr {self.sinr_db} dB outside [{SINR_MIN}, {SINR_MAX}]")
        _check(self.source in RADIO_SOURCES, "source", f"unknown source {self.source!r}")

    def to_json_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "t": self.t,
            "rsrp_dbm": self.rsrp_dbm,
            "rsrq_db": self.rsrq_db,
            "sinr_db": self.sinr_db,
            "source": self.source,
        }
        if self.position is not None:
            d["lat_deg"] = self.position.lat_deg
            d["lon_deg"] = self.position.lon_deg
        return d

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "RadioSample":
        pos = None
        if "lat_deg" in d and "lon_deg" in d:
            pos = GeoPoint(float(d["lat_deg"]), float(d["lon_deg"]))
        return cls(
            t=float(d["t"]),
            rsrp_dbm=float(d["rsrp_dbm"]),
            rsrq_db=float(d["rsrq_db"]),
            sinr_db=float(d["sinr_db"]),
            position=pos,
            source=str(d.get("source", "trace_file")),
        )


@dataclass(frozen=True)
class LinkSample:
    """One L3 observation: interface byte-counter deltas over a window."""

    t: float
    rx_bytes_delta: int
    tx_bytes_delta: int
    window_s: float = 1.0

    def __post_init__(self):
        _check(self.window_s > 0, "window", f"window {self.window_s} must be > 0")
        _check(self.rx_bytes_delta >= 0, "rx_bytes_delta", "rx delta must be >= 0")
        _check(self.tx_bytes_delta >= 0, "tx_bytes_delta", "tx delta must be >= 0")

    @property
    def rx_throughput_mbps(self) -> float:
        return 8.0 * self.rx_bytes_delta / self.window_s / 1e6

    @property
    def tx_throughput_mbps(self) -> float:
        return 8.0 * self.tx_bytes_delta / self.window_s / 1e6

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "rx_bytes_delta": self.rx_bytes_delta,
            "tx_bytes_delta": self.tx_bytes_delta,
            "window_s": self.window_s,
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "LinkSample":
        return cls(
            t=float(d["t"]),
            rx_bytes_delta=int(d["rx_bytes_delta"]),
            tx_bytes_delta=int(d["tx_bytes_delta"]),
            window_s=float(d.get("window_s", 1.0)),
        )


@dataclass(frozen=True)
class SegmentRecord:
    """One L7 observation: a media segment relayed by the proxy."""

    session_id: str
    rep_id: str
    rep_bitrate_kbps: float
    segment_index: int
    bytes: int
    t_request: float
    t_first_byte: float
    t_complete: float
    origin_status: int = 200

    def __post_init__(self):
        _check(self.t_request <= self.t_first_byte <= self.t_complete, "timestamps",
               "need t_request <= t_first_byte <= t_complete")
        if self.success:
            _check(self.bytes > 0, "bytes", "successful download must carry bytes")
            _check(self.t_complete > self.t_request, "timestamps",
                   "successful download needs positive duration")

    @property
    def success(self) -> bool:
        return 200 <= self.origin_status < 300

    @property
    def duration_s(self) -> float:
        return self.t_complete - self.t_request

    @property
    def l7_throughput_mbps(self) -> float:
        return 8.0 * self.bytes / self.duration_s / 1e6

    @property
    def midpoint(self) -> float:
        return (self.t_request + self.t_complete) / 2.0

    def to_json_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "SegmentRecord":
        return cls(
            session_id=str(d["session_id"]),
            rep_id=str(d["rep_id"]),
            rep_bitrate_kbps=float(d["rep_bitrate_kbps"]),
            segment_index=int(d["segment_index"]),
            bytes=int(d["bytes"]),
            t_request=float(d["t_request"]),
            t_first_byte=float(d["t_first_byte"]),
            t_complete=float(d["t_complete"]),
            origin_status=int(d.get("origin_status", 200)),
        )


@dataclass(frozen=True)
class StallEvent:
    """A playback interruption (buffer underrun)."""

    t_start: float
    duration_s: float

    def __post_init__(self):
        _check(self.duration_s > 0, "duration", "stall duration must be > 0")

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration_s

    def to_json_dict(self) -> dict[str, Any]:
        return {"t_start": self.t_start, "duration_s": self.duration_s}

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "StallEvent":
        return cls(t_start=float(d["t_start"]), duration_s=float(d["duration_s"]))


def check_stalls(events: list[StallEvent]) -> None:
    """Reject overlapping or unordered stall events."""
    for prev, cur in zip(events, events[1:]):
        if cur.t_start < prev.t_start:
            raise FieldRangeError("t_start", "stall events must be ordered by t_start")
        if cur.t_start < prev.t_end:
            raise FieldRangeError("t_start", f"stall events overlap at t={cur.t_start}")


@dataclass(frozen=True)
class QoeScore:
    """MOS estimate at an evaluation instant, with its contributing features."""

    t: float
    mos: float
    video_quality_mean: float
    stall_count: int
    stall_total_s: float
    session_id: str = ""

    def __post_init__(self):
        _check(1.0 <= self.mos <= 5.0, "mos", f"mos {self.mos} outside [1, 5]")
        _check(1.0 <= self.video_quality_mean <= 5.0, "video_quality_mean",
               f"video quality {self.video_quality_mean} outside [1, 5]")
        _check(self.stall_count >= 0, "stall_count", "stall count must be >= 0")
        _check(self.stall_total_s >= 0, "stall_total_s", "stall total must be >= 0")

    def to_json_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "QoeScore":
        return cls(
            t=float(d["t"]),
            mos=float(d["mos"]),
            video_quality_mean=float(d["video_quality_mean"]),
            stall_count=int(d["stall_count"]),
            stall_total_s=float(d["stall_total_s"]),
            session_id=str(d.get("session_id", "")),
        )


@dataclass(frozen=True)
class SessionEvent:
    """Proxy session lifecycle marker (open/close)."""

    event: str
    session_id: str
    client_key: str
    mpd_path: str
    t: float

    def __post_init__(self):
        _check(self.event in ("open", "close"), "event", f"unknown session event {self.event!r}")

    def to_json_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "SessionEvent":
        return cls(
            event=str(d["event"]),
            session_id=str(d["session_id"]),
            client_key=str(d.get("client_key", "")),
            mpd_path=str(d.get("mpd_path", "")),
            t=float(d["t"]),
        )
