"""Drive-trace CSV: the canonical interchange between field logs, the replay
harness, and tests.

Schema (UTF-8, one row per second, ``t_s`` seconds from run start):

    t_s,lat_deg,lon_deg,rsrp_dbm,rsrq_db,sinr_db
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable

from ..records import FieldRangeError, GeoPoint, RadioSample

TRACE_FIELDS = ("t_s", "lat_deg", "lon_deg", "rsrp_dbm", "rsrq_db", "sinr_db")


class TraceFormatError(ValueError):
    """Trace file violates the schema; carries the offending 1-based line."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"{message} (line {line_no})")
        self.line_no = line_no


def read_drive_trace(path: str | Path) -> list[RadioSample]:
    """Read and validate a trace; timestamps must be strictly increasing."""
    samples: list[RadioSample] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return []
        if tuple(h.strip() for h in header) != TRACE_FIELDS:
            raise TraceFormatError(
                f"header must be {','.join(TRACE_FIELDS)}, got {','.join(header)}", 1
            )
        prev_t = None
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(TRACE_FIELDS):
                raise TraceFormatError(f"expected {len(TRACE_FIELDS)} columns, got {len(row)}", line_no)
            try:
                t, lat, lon, rsrp, rsrq, sinr = (float(x) for x in row)
            except ValueError as exc:
                raise TraceFormatError(f"non-numeric value: {exc}", line_no) from exc
            if prev_t is not None and t <= prev_t:
                raise TraceFormatError(f"timestamps must be strictly increasing ({t} after {prev_t})", line_no)
            prev_t = t
            try:
                samples.append(
                    RadioSample(
                        t=t,
                        rsrp_dbm=rsrp,
                        rsrq_db=rsrq,
                        sinr_db=sinr,
                        position=GeoPoint(lat, lon),
                        source="trace_file",
                    )
                )
            except FieldRangeError as exc:
                raise TraceFormatError(str(exc), line_no) from exc
    return samples


def write_drive_trace(path: str | Path, samples: Iterable[RadioSample]) -> None:
    """Write samples in the canonical formatting (deterministic bytes)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_FIELDS)
        for s in samples:
            if s.position is None:
                raise ValueError(f"trace rows need a position (t={s.t})")
            writer.writerow(
                [
                    f"{s.t:.3f}",
                    f"{s.position.lat_deg:.7f}",
                    f"{s.position.lon_deg:.7f}",
                    f"{s.rsrp_dbm:.3f}",
                    f"{s.rsrq_db:.3f}",
                    f"{s.sinr_db:.3f}",
                ]
            )
