"""UE-side export orchestration: turn logs/traces/counters into published samples."""

from __future__ import annotations

import time
from pathlib import Path
from typing import Iterable, Optional

from ..records import GeoPoint, RadioSample
from .modem import parse_modem_status_line
from .nmea import ChecksumError, parse_nmea
from .publisher import Publisher
from .trace import read_drive_trace

GPS_JOIN_TOLERANCE_S = 0.5


def samples_from_logs(
    modem_lines: Iterable[str],
    nmea_lines: Iterable[str] = (),
    rate_hz: float = 1.0,
) -> tuple[list[RadioSample], dict]:
    """Stamp parsed log lines at the sampling cadence and join GPS to RF.

    Logged responses carry no timestamps, so the i-th parsed status (and the
    i-th valid fix) is stamped ``i / rate_hz`` seconds from log start; fixes
    are then attached to the nearest status within +-0.5 s.
    """
    if rate_hz <= 0:
        raise ValueError("rate_hz must be > 0")
    period = 1.0 / rate_hz

    fixes: list[tuple[float, GeoPoint]] = []
    checksum_errors = 0
    for line in nmea_lines:
        try:
            point = parse_nmea(line)
        except ChecksumError:
            checksum_errors += 1
            continue
        if point is not None:
            fixes.append((len(fixes) * period, point))

    samples: list[RadioSample] = []
    skipped = 0
    for line in modem_lines:
        status = parse_modem_status_line(line)
        if status is None:
            skipped += 1
            continue
        t = len(samples) * period
        samples.append(
            RadioSample(
                t=t,
                rsrp_dbm=status.rsrp_dbm,
                rsrq_db=status.rsrq_db,
                sinr_db=status.sinr_db,
                position=_nearest_fix(fixes, t),
                source="modem_log",
            )
        )
    counters = {"skipped_lines": skipped, "checksum_errors": checksum_errors, "gps_fixes": len(fixes)}
    return samples, counters


def _nearest_fix(fixes: list[tuple[float, GeoPoint]], t: float) -> Optional[GeoPoint]:
    best = None
    best_gap = GPS_JOIN_TOLERANCE_S
    for ft, point in fixes:
        gap = abs(ft - t)
        if gap <= best_gap:
            best = point
            best_gap = gap
    return best


def export_samples(
    samples: Iterable[RadioSample],
    publisher: Publisher,
    rate_hz: float = 0.0,
) -> int:
    """Publish samples; ``rate_hz`` > 0 paces them in wall time (live replay)."""
    count = 0
    for sample in samples:
        publisher.publish(sample)
        count += 1
        if rate_hz > 0:
            time.sleep(1.0 / rate_hz)
    return count


def export_trace_file(path: str | Path, publisher: Publisher, rate_hz: float = 0.0) -> int:
    return export_samples(read_drive_trace(path), publisher, rate_hz)
