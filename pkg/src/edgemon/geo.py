"""Local planar geometry over WGS84 points (equirectangular approximation).

Good to well under a meter over the few-kilometre extents this package
works with; not suitable for continental distances.
"""

from __future__ import annotations

import math

from .records import GeoPoint

EARTH_RADIUS_M = 6371000.0


def local_xy(point: GeoPoint, anchor: GeoPoint) -> tuple[float, float]:
    """Meters east/north of ``anchor``."""
    lat0 = math.radians(anchor.lat_deg)
    x = math.radians(point.lon_deg - anchor.lon_deg) * math.cos(lat0) * EARTH_RADIUS_M
    y = math.radians(point.lat_deg - anchor.lat_deg) * EARTH_RADIUS_M
    return x, y


def offset_point(anchor: GeoPoint, dx_m: float, dy_m: float) -> GeoPoint:
    """Inverse of :func:`local_xy`: the point ``(dx, dy)`` meters from anchor."""
    lat0 = math.radians(anchor.lat_deg)
    lat = anchor.lat_deg + math.degrees(dy_m / EARTH_RADIUS_M)
    lon = anchor.lon_deg + math.degrees(dx_m / (EARTH_RADIUS_M * math.cos(lat0)))
    return GeoPoint(lat_deg=lat, lon_deg=lon)


def distance_m(a: GeoPoint, b: GeoPoint) -> float:
    x, y = local_xy(a, b)
    return math.hypot(x, y)
