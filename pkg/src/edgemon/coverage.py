"""RSRP coverage mapping: zone classification, grid binning, GeoJSON output.

Zone boundaries are upper-exclusive: a sample exactly on a boundary belongs
to the worse zone (-80 dBm is Good, -100 dBm is CellEdge).
"""

from __future__ import annotations

import enum
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .geo import local_xy, offset_point
from .records import GeoPoint, RadioSample, RSRP_MAX, RSRP_MIN


class Zone(enum.IntEnum):
    CELL_EDGE = 0
    MID = 1
    GOOD = 2
    EXCELLENT = 3

    @property
    def color(self) -> str:
        return _ZONE_COLORS[self]

    @property
    def label(self) -> str:
        return _ZONE_LABELS[self]


_ZONE_COLORS = {
    Zone.EXCELLENT: "green",
    Zone.GOOD: "yellow",
    Zone.MID: "orange",
    Zone.CELL_EDGE: "red",
}

_ZONE_LABELS = {
    Zone.EXCELLENT: "excellent",
    Zone.GOOD: "good",
    Zone.MID: "mid",
    Zone.CELL_EDGE: "cell_edge",
}


def classify_rsrp(rsrp_dbm: float) -> Zone:
    """Map an RSRP reading to its signal zone.

    Excellent above -80 dBm, Good down to -90, Mid down to -100, CellEdge at
    and below -100.
    """
    if not RSRP_MIN <= rsrp_dbm <= RSRP_MAX:
        raise ValueError(f"rsrp {rsrp_dbm} dBm outside reporting range [{RSRP_MIN}, {RSRP_MAX}]")
    if rsrp_dbm > -80.0:
        return Zone.EXCELLENT
    if rsrp_dbm > -90.0:
        return Zone.GOOD
    if rsrp_dbm > -100.0:
        return Zone.MID
    return Zone.CELL_EDGE


@dataclass(frozen=True)
class CoverageCell:
    cell_id: tuple[int, int]
    center: GeoPoint
    sample_count: int
    rsrp_median_dbm: float
    zone: Zone
    cell_size_m: float


def build_coverage(samples: Iterable[RadioSample], cell_size_m: float = 25.0) -> list[CoverageCell]:
    """Bucket positioned samples into a grid anchored at the bounding box SW
    corner; each occupied cell gets the zone of its median RSRP."""
    if cell_size_m <= 0:
        raise ValueError("cell size must be > 0")
    positioned = [s for s in samples if s.position is not None]
    if not positioned:
        raise ValueError("no positioned samples to map")

    anchor = GeoPoint(
        lat_deg=min(s.position.lat_deg for s in positioned),
        lon_deg=min(s.position.lon_deg for s in positioned),
    )
    buckets: dict[tuple[int, int], list[float]] = defaultdict(list)
    for s in positioned:
        x, y = local_xy(s.position, anchor)
        idx = (math.floor(x / cell_size_m), math.floor(y / cell_size_m))
        buckets[idx].append(s.rsrp_dbm)

    cells = []
    for (i, j) in sorted(buckets):
        values = buckets[(i, j)]
        median = float(np.median(values))
        cells.append(
            CoverageCell(
                cell_id=(i, j),
                center=offset_point(anchor, (i + 0.5) * cell_size_m, (j + 0.5) * cell_size_m),
                sample_count=len(values),
                rsrp_median_dbm=median,
                zone=classify_rsrp(median),
                cell_size_m=cell_size_m,
            )
        )
    return cells


def cell_polygon(cell: CoverageCell) -> list[list[float]]:
    """Closed [lon, lat] ring of the cell square, 6-decimal coordinates."""
    half = cell.cell_size_m / 2.0
    corners = [(-half, -half), (half, -half), (half, half), (-half, half), (-half, -half)]
    ring = []
    for dx, dy in corners:
        p = offset_point(cell.center, dx, dy)
        ring.append([round(p.lon_deg, 6), round(p.lat_deg, 6)])
    return ring


def to_geojson(cells: list[CoverageCell]) -> bytes:
    """RFC 7946 FeatureCollection; byte-deterministic for identical input."""
    features = []
    for cell in cells:
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [cell_polygon(cell)]},
                "properties": {
                    "cell_i": cell.cell_id[0],
                    "cell_j": cell.cell_id[1],
                    "color": cell.zone.color,
                    "rsrp_median_dbm": round(cell.rsrp_median_dbm, 3),
                    "sample_count": cell.sample_count,
                    "zone": cell.zone.label,
                },
            }
        )
    doc = {"type": "FeatureCollection", "features": features}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode() + b"\n"
