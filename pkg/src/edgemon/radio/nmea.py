"""NMEA 0183 position decoding (GGA/RMC subset) with checksum verification."""

from __future__ import annotations

from typing import Optional

from ..records import GeoPoint


class ChecksumError(ValueError):
    """Sentence checksum does not match its payload."""


def nmea_checksum(payload: str) -> int:
    """XOR of all characters between '$' and '*'."""
    cs = 0
    for ch in payload:
        cs ^= ord(ch)
    return cs


def _dm_to_degrees(dm: str, hemisphere: str, deg_digits: int) -> float:
    degrees = float(dm[:deg_digits])
    minutes = float(dm[deg_digits:])
    value = degrees + minutes / 60.0
    if hemisphere in ("S", "W"):
        value = -value
    return value


def parse_nmea(line: str) -> Optional[GeoPoint]:
    """Decode a GGA/RMC sentence into a GeoPoint.

    Returns None for unsupported sentence types, sentences without a fix, or
    lines that are not NMEA at all. Raises :class:`ChecksumError` when a
    well-formed sentence fails its checksum (callers count these).
    """
    line = line.strip()
    if not line.startswith("$") or "*" not in line:
        return None
    payload, _, given = line[1:].rpartition("*")
    if len(given) < 2:
        return None
    try:
        expected = int(given[:2], 16)
    except ValueError:
        return None
    if nmea_checksum(payload) != expected:
        raise ChecksumError(f"checksum mismatch: computed {nmea_checksum(payload):02X}, line has {given[:2]}")

    fields = payload.split(",")
    sentence = fields[0][-3:]
    try:
        if sentence == "GGA":
            lat_dm, ns, lon_dm, ew = fields[2], fields[3], fields[4], fields[5]
        elif sentence == "RMC":
            lat_dm, ns, lon_dm, ew = fields[3], fields[4], fields[5], fields[6]
        else:
            return None
        if not lat_dm or not lon_dm:
            return None
        return GeoPoint(
            lat_deg=_dm_to_degrees(lat_dm, ns, 2),
            lon_deg=_dm_to_degrees(lon_dm, ew, 3),
        )
    except (IndexError, ValueError):
        return None


def format_nmea(sentence_payload: str) -> str:
    """Attach '$' and a valid checksum to a payload (test/fixture helper)."""
    return f"${sentence_payload}*{nmea_checksum(sentence_payload):02X}"
