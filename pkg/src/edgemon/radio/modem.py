"""Parsing of logged modem status lines into L1 metrics.

The supported grammar is one positional CSV line per report:

    #RFSTS: <plmn>,<arfcn>,<rsrp_dbm>,<rsrq_db>,<sinr_db>[,<extra>...]

Anything that does not match (other AT responses, prompts, `OK`, partial
lines) is a skip, not an error; values outside the 3GPP reporting ranges
raise naming the offending field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..records import (
    FieldRangeError,
    RSRP_MAX,
    RSRP_MIN,
    RSRQ_MAX,
    RSRQ_MIN,
    SINR_MAX,
    SINR_MIN,
)

RFSTS_PREFIX = "#RFSTS:"


@dataclass(frozen=True)
class ModemStatus:
    """L1 fields of one status line (a partial radio sample, no fix/time)."""

    rsrp_dbm: float
    rsrq_db: float
    sinr_db: float


def parse_modem_status_line(line: str) -> Optional[ModemStatus]:
    """Parse one log line; returns None for lines outside the grammar."""
    line = line.strip()
    if not line.startswith(RFSTS_PREFIX):
        return None
    fields = [f.strip().strip('"') for f in line[len(RFSTS_PREFIX):].split(",")]
    if len(fields) < 5:
        return None
    try:
        rsrp = float(fields[2])
        rsrq = float(fields[3])
        sinr = float(fields[4])
    except ValueError:
        return None
    if not RSRP_MIN <= rsrp <= RSRP_MAX:
        raise FieldRangeError("rsrp", f"rsrp {rsrp} dBm outside [{RSRP_MIN}, {RSRP_MAX}]")
    if not RSRQ_MIN <= rsrq <= RSRQ_MAX:
        raise FieldRangeError("rsrq", f"rsrq {rsrq} dB outside [{RSRQ_MIN}, {RSRQ_MAX}]")
    if not SINR_MIN <= sinr <= SINR_MAX:
        raise FieldRangeError("sinr", f"sinr {sinr} dB outside [{SINR_MIN}, {SINR_MAX}]")
    return ModemStatus(rsrp_dbm=rsrp, rsrq_db=rsrq, sinr_db=sinr)
