from .model import (
    InsufficientDataError,
    SegmentQuality,
    integrate_mos,
    load_coefficients,
    mos_from_r,
    qoe_series,
    r_from_mos,
    segment_video_quality,
    stall_degradation,
    stall_impact,
)

__all__ = [
    "InsufficientDataError",
    "SegmentQuality",
    "integrate_mos",
    "load_coefficients",
    "mos_from_r",
    "qoe_series",
    "r_from_mos",
    "segment_video_quality",
    "stall_degradation",
    "stall_impact",
]
