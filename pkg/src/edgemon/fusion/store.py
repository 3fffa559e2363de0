"""Monitoring fusion store: multi-layer time series plus raw observation logs.

Ingestion is idempotent (per-series duplicate timestamps and duplicate raw
records are dropped with an acknowledged flag), queries resample onto a step
grid with last-observation-carried-forward bounded by a staleness limit, and
alignment joins L7 segment records with the nearest L1 sample and the L3
windows they overlap. Everything is timestamp-keyed, so ingestion order does
not affect query results.
"""

from __future__ import annotations

import bisect
import json
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..records import (
    LinkSample,
    QoeScore,
    RadioSample,
    SegmentRecord,
    SessionEvent,
)

Record = Union[RadioSample, LinkSample, SegmentRecord, QoeScore]

LAYER_PREFIX = {"L1": "radio", "L3": "link", "L7": "media", "QoE": "qoe"}

DEFAULT_ALIGNMENT_TOLERANCE_S = 1.0
DEFAULT_LOCF_STALENESS_S = 5.0


class UnknownSeriesError(KeyError):
    pass


class InsufficientPointsError(ValueError):
    """Fewer than the required aligned grid points for a correlation."""


class DegenerateSeriesError(ValueError):
    """A series has zero variance on the common grid; correlation undefined."""


@dataclass(frozen=True)
class SeriesKey:
    layer: str
    metric: str
    session_id: Optional[str] = None
    labels: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.layer not in LAYER_PREFIX:
            raise ValueError(f"unknown layer {self.layer!r}")
        object.__setattr__(self, "labels", tuple(sorted(self.labels)))

    @property
    def name(self) -> str:
        return f"{LAYER_PREFIX[self.layer]}_{self.metric}"


@dataclass
class _Series:
    ts: list[float] = field(default_factory=list)
    vs: list[float] = field(default_factory=list)

    def insert(self, t: float, v: float) -> bool:
        i = bisect.bisect_left(self.ts, t)
        if i < len(self.ts) and self.ts[i] == t:
            return False
        self.ts.insert(i, t)
        self.vs.insert(i, v)
        return True


@dataclass(frozen=True)
class IngestAck:
    stored: bool
    duplicate: bool = False


@dataclass
class QueryResult:
    points: list[tuple[float, float]]
    unknown_series: bool = False


@dataclass
class AlignedRecord:
    segment: SegmentRecord
    radio: Optional[RadioSample]
    link_window: list[LinkSample]
    gap_s: Optional[float]
    aligned: bool

    @property
    def mean_l3_mbps(self) -> Optional[float]:
        if not self.link_window:
            return None
        return float(np.mean([ls.rx_throughput_mbps for ls in self.link_window]))


class FusionStore:
    """In-process append-only store shared by collectors and queries."""

    def __init__(
        self,
        alignment_tolerance_s: float = DEFAULT_ALIGNMENT_TOLERANCE_S,
        locf_staleness_s: float = DEFAULT_LOCF_STALENESS_S,
    ):
        self.alignment_tolerance_s = alignment_tolerance_s
        self.locf_staleness_s = locf_staleness_s
        self._lock = threading.RLock()
        self._series: dict[SeriesKey, _Series] = {}
        self._radio_ts: list[float] = []
        self._radio: list[RadioSample] = []
        self._link: list[LinkSample] = []
        self._segments: list[SegmentRecord] = []
        self._qoe: list[QoeScore] = []
        self._session_events: list[SessionEvent] = []
        self._seen: set = set()

    # -- ingestion ---------------------------------------------------------

    def ingest(self, record: Record) -> IngestAck:
        """Store a typed record; duplicates are acknowledged but not re-stored."""
        with self._lock:
            if isinstance(record, RadioSample):
                return self._ingest_radio(record)
            if isinstance(record, LinkSample):
                return self._ingest_link(record)
            if isinstance(record, SegmentRecord):
                return self._ingest_segment(record)
            if isinstance(record, QoeScore):
                return self._ingest_qoe(record)
        raise TypeError(f"cannot ingest {type(record).__name__}")

    def ingest_session_event(self, ev: SessionEvent) -> IngestAck:
        with self._lock:
            key = ("session", ev.session_id, ev.event, ev.t)
            if key in self._seen:
                return IngestAck(stored=False, duplicate=True)
            self._seen.add(key)
            self._session_events.append(ev)
            return IngestAck(stored=True)

    def ingest_point(self, key: SeriesKey, t: float, v: float) -> IngestAck:
        """Append a bare numeric point (derived/analytics series)."""
        with self._lock:
            stored = self._series.setdefault(key, _Series()).insert(t, float(v))
            return IngestAck(stored=stored, duplicate=not stored)

    def _ingest_radio(self, s: RadioSample) -> IngestAck:
        dedup = ("radio", s.source, s.t)
        if dedup in self._seen:
            return IngestAck(stored=False, duplicate=True)
        self._seen.add(dedup)
        i = bisect.bisect_left(self._radio_ts, s.t)
        self._radio_ts.insert(i, s.t)
        self._radio.insert(i, s)
        for metric, v in (("rsrp_dbm", s.rsrp_dbm), ("rsrq_db", s.rsrq_db), ("sinr_db", s.sinr_db)):
            self._series.setdefault(SeriesKey("L1", metric), _Series()).insert(s.t, v)
        return IngestAck(stored=True)

    def _ingest_link(self, s: LinkSample) -> IngestAck:
        dedup = ("link", s.t)
        if dedup in self._seen:
            return IngestAck(stored=False, duplicate=True)
        self._seen.add(dedup)
        i = bisect.bisect_left([x.t for x in self._link], s.t)
        self._link.insert(i, s)
        self._series.setdefault(SeriesKey("L3", "rx_throughput_mbps"), _Series()).insert(
            s.t, s.rx_throughput_mbps
        )
        self._series.setdefault(SeriesKey("L3", "tx_throughput_mbps"), _Series()).insert(
            s.t, s.tx_throughput_mbps
        )
        return IngestAck(stored=True)

    def _ingest_segment(self, r: SegmentRecord) -> IngestAck:
        dedup = ("segment", r.session_id, r.rep_id, r.segment_index, r.t_request)
        if dedup in self._seen:
            return IngestAck(stored=False, duplicate=True)
        self._seen.add(dedup)
        i = bisect.bisect_left([x.t_request for x in self._segments], r.t_request)
        self._segments.insert(i, r)
        if r.success:
            self._series.setdefault(
                SeriesKey("L7", "l7_throughput_mbps", r.session_id), _Series()
            ).insert(r.t_complete, r.l7_throughput_mbps)
            self._series.setdefault(
                SeriesKey("L7", "segment_bitrate_kbps", r.session_id), _Series()
            ).insert(r.t_complete, r.rep_bitrate_kbps)
        return IngestAck(stored=True)

    def _ingest_qoe(self, q: QoeScore) -> IngestAck:
        dedup = ("qoe", q.session_id, q.t)
        if dedup in self._seen:
            return IngestAck(stored=False, duplicate=True)
        self._seen.add(dedup)
        self._qoe.append(q)
        for metric, v in (
            ("mos", q.mos),
            ("video_quality_mean", q.video_quality_mean),
            ("stall_count", float(q.stall_count)),
            ("stall_total_s", q.stall_total_s),
        ):
            self._series.setdefault(SeriesKey("QoE", metric, q.session_id), _Series()).insert(q.t, v)
        return IngestAck(stored=True)

    # -- snapshots ---------------------------------------------------------

    def radio_samples(self) -> list[RadioSample]:
        with self._lock:
            return list(self._radio)

    def link_samples(self) -> list[LinkSample]:
        with self._lock:
            return list(self._link)

    def segment_records(self) -> list[SegmentRecord]:
        with self._lock:
            return list(self._segments)

    def qoe_scores(self) -> list[QoeScore]:
        with self._lock:
            return sorted(self._qoe, key=lambda q: (q.session_id, q.t))

    def session_events(self) -> list[SessionEvent]:
        with self._lock:
            return list(self._session_events)

    def series_keys(self) -> list[SeriesKey]:
        with self._lock:
            return sorted(self._series, key=lambda k: (k.name, k.session_id or "", k.labels))

    def series_points(self, key: SeriesKey) -> list[tuple[float, float]]:
        with self._lock:
            s = self._series.get(key)
            return list(zip(s.ts, s.vs)) if s else []

    # -- queries -----------------------------------------------------------

    def query_range(self, key: SeriesKey, t0: float, t1: float, step_s: float) -> QueryResult:
        """LOCF-resample a series onto the [t0, t1] grid (staleness-bounded)."""
        if t0 >= t1:
            raise ValueError("need t0 < t1")
        if step_s <= 0:
            raise ValueError("step must be > 0")
        with self._lock:
            series = self._series.get(key)
            if series is None:
                return QueryResult(points=[], unknown_series=True)
            ts = list(series.ts)
            vs = list(series.vs)
        points = []
        n = int(round((t1 - t0) / step_s))
        for k in range(n + 1):
            g = t0 + k * step_s
            if g > t1 + 1e-9:
                break
            i = bisect.bisect_right(ts, g) - 1
            if i >= 0 and g - ts[i] <= self.locf_staleness_s:
                points.append((g, vs[i]))
        return QueryResult(points=points)

    def align(self, segment: SegmentRecord) -> AlignedRecord:
        """Join one segment record with nearest radio and overlapping link windows."""
        with self._lock:
            radio_ts = list(self._radio_ts)
            radio = list(self._radio)
            links = list(self._link)
        mid = segment.midpoint
        nearest = None
        gap = None
        if radio:
            i = bisect.bisect_left(radio_ts, mid)
            for j in (i - 1, i):
                if 0 <= j < len(radio):
                    d = abs(radio_ts[j] - mid)
                    if gap is None or d < gap:
                        gap = d
                        nearest = radio[j]
        window = [
            ls
            for ls in links
            if ls.t - ls.window_s <= segment.t_complete and ls.t >= segment.t_request
        ]
        aligned = gap is not None and gap <= self.alignment_tolerance_s
        return AlignedRecord(
            segment=segment, radio=nearest, link_window=window, gap_s=gap, aligned=aligned
        )

    def correlate(self, a: SeriesKey, b: SeriesKey, t0: float, t1: float, step_s: float) -> float:
        """Pearson r between two series on their common resampled grid."""
        ra = self.query_range(a, t0, t1, step_s)
        rb = self.query_range(b, t0, t1, step_s)
        da = dict(ra.points)
        db = dict(rb.points)
        common = sorted(set(da) & set(db))
        if len(common) < 3:
            raise InsufficientPointsError(
                f"need >= 3 aligned grid points, have {len(common)}"
            )
        xs = np.array([da[t] for t in common])
        ys = np.array([db[t] for t in common])
        if float(np.std(xs)) == 0.0 or float(np.std(ys)) == 0.0:
            raise DegenerateSeriesError("zero variance on common grid")
        return float(np.corrcoef(xs, ys)[0, 1])

    # -- exposition --------------------------------------------------------

    def exposition(self) -> str:
        """Latest point of every series, line-oriented, deterministically ordered."""
        with self._lock:
            entries = []
            for key, series in self._series.items():
                if not series.ts:
                    continue
                labels = {"session": key.session_id or ""}
                labels.update(dict(key.labels))
                label_str = ",".join(
                    f'{name}="{_escape_label(value)}"' for name, value in sorted(labels.items())
                )
                t, v = series.ts[-1], series.vs[-1]
                entries.append((key.name, label_str, v, t))
        entries.sort(key=lambda e: (e[0], e[1]))
        lines = [
            f"{name}{{{label_str}}} {_format_value(v)} {int(round(t * 1000))}"
            for name, label_str, v, t in entries
        ]
        return "\n".join(lines) + "\n"

    # -- persistence -------------------------------------------------------

    def persist(self, directory: Path | str) -> list[Path]:
        """Write per-series JSONL files plus raw record logs; returns paths."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        with self._lock:
            for key in self.series_keys():
                series = self._series[key]
                path = directory / (_series_filename(key) + ".jsonl")
                with path.open("w") as fh:
                    header = {
                        "series": {
                            "layer": key.layer,
                            "metric": key.metric,
                            "session_id": key.session_id,
                            "labels": dict(key.labels),
                        }
                    }
                    fh.write(json.dumps(header, sort_keys=True) + "\n")
                    for t, v in zip(series.ts, series.vs):
                        fh.write(json.dumps({"t": t, "v": v}) + "\n")
                written.append(path)
            raw = {
                "records_radio": [r.to_json_dict() for r in self._radio],
                "records_link": [r.to_json_dict() for r in self._link],
                "records_segment": [r.to_json_dict() for r in self._segments],
                "records_qoe": [q.to_json_dict() for q in sorted(self._qoe, key=lambda q: (q.session_id, q.t))],
                "records_session": [e.to_json_dict() for e in self._session_events],
            }
        for name, rows in raw.items():
            path = directory / f"{name}.jsonl"
            with path.open("w") as fh:
                for row in rows:
                    fh.write(json.dumps(row, sort_keys=True) + "\n")
            written.append(path)
        return written


def load_store(directory: Path | str, **kwargs) -> FusionStore:
    """Rebuild a store from :meth:`FusionStore.persist` output."""
    directory = Path(directory)
    store = FusionStore(**kwargs)
    loaders = {
        "records_radio": (RadioSample, store.ingest),
        "records_link": (LinkSample, store.ingest),
        "records_segment": (SegmentRecord, store.ingest),
        "records_qoe": (QoeScore, store.ingest),
        "records_session": (SessionEvent, store.ingest_session_event),
    }
    for name, (cls, sink) in loaders.items():
        path = directory / f"{name}.jsonl"
        if not path.exists():
            continue
        with path.open() as fh:
            for line in fh:
                if line.strip():
                    sink(cls.from_json_dict(json.loads(line)))
    for path in sorted(directory.glob("*.jsonl")):
        if path.stem.startswith("records_"):
            continue
        with path.open() as fh:
            header = json.loads(fh.readline())
            meta = header["series"]
            key = SeriesKey(
                layer=meta["layer"],
                metric=meta["metric"],
                session_id=meta["session_id"],
                labels=tuple(sorted(meta.get("labels", {}).items())),
            )
            for line in fh:
                if line.strip():
                    row = json.loads(line)
                    store.ingest_point(key, row["t"], row["v"])
    return store


def _escape_label(value: str) -> str:
    return value.replace("\\", r"\\").replace('"', r"\"").replace("\n", r"\n")


def _format_value(v: float) -> str:
    return f"{v:.10g}"


_FNAME_SAFE = re.compile(r"[^A-Za-z0-9._-]+")


def _series_filename(key: SeriesKey) -> str:
    parts = [key.name]
    if key.session_id:
        parts.append(key.session_id)
    for name, value in key.labels:
        parts.append(f"{name}-{value}")
    return _FNAME_SAFE.sub("-", "__".join(parts))
