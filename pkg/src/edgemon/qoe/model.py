"""Session QoE estimation from segment metadata and stalling.

Structure follows the metadata-only ("Mode 0") style of ITU-T P.1203: a
per-segment coding-quality score from bitrate/resolution/framerate, an
upscaling and a framerate degradation combined on a 100-point scale, a
recency-weighted integration over the session, and a multiplicative
stalling impact. All constants live in the versioned ``coefficients.json``
next to this module; the frozen corpus under ``golden/qoe/`` pins the
numeric behavior of each stage.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from ..mpd import Manifest
from ..records import QoeScore, SegmentRecord, StallEvent, check_stalls


class InsufficientDataError(Exception):
    """No segment fully inside the evaluation horizon; no score can be produced."""


def load_coefficients() -> dict:
    with resources.files("edgemon.qoe").joinpath("coefficients.json").open("r") as fh:
        return json.load(fh)


_COEFFS = load_coefficients()


def _clamp(x: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, x))


def mos_from_r(r: float, coeffs: dict = _COEFFS) -> float:
    """Map a 0..100 quality scale value to MOS (E-model style transform)."""
    mos_min = coeffs["scale"]["mos_min"]
    mos_max = coeffs["scale"]["mos_max"]
    r = _clamp(r, 0.0, 100.0)
    return mos_min + (mos_max - mos_min) / 100.0 * r + r * (r - 60.0) * (100.0 - r) * 7.0e-6


def r_from_mos(mos: float, coeffs: dict = _COEFFS) -> float:
    """Numeric inverse of :func:`mos_from_r` by bisection over [0, 100]."""
    mos = _clamp(mos, coeffs["scale"]["mos_min"], coeffs["scale"]["mos_max"])
    lo, hi = 0.0, 100.0
    for _ in range(80):
        mid = (lo + hi) / 2.0
        if mos_from_r(mid, coeffs) < mos:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def segment_video_quality(
    bitrate_kbps: float,
    width: int,
    height: int,
    framerate: float,
    display: tuple[int, int] = (3840, 2160),
    device: str = "pc",
    coeffs: dict = _COEFFS,
) -> float:
    """Per-segment coding quality in [1, 5] from bitstream metadata.

    Non-decreasing in bitrate (other inputs fixed) and non-increasing in the
    display/coded upscaling ratio.
    """
    if bitrate_kbps <= 0 or width < 1 or height < 1 or framerate <= 0:
        raise ValueError("bitrate, resolution and framerate must be positive")
    if display[0] < 1 or display[1] < 1:
        raise ValueError("display must be at least 1x1")
    v = coeffs["video"]

    bpp = bitrate_kbps * 1000.0 / (width * height * framerate)
    span = math.log(v["bpp_high"]) - math.log(v["bpp_low"])
    quant = _clamp((math.log(v["bpp_high"]) - math.log(bpp)) / span, 0.0, 1.0)
    mos_q = _clamp(
        v["mosq_a"] + v["mosq_b"] * math.exp(v["mosq_c"] * quant),
        coeffs["scale"]["mos_min"],
        coeffs["scale"]["mos_max"],
    )
    d_quant = 100.0 - r_from_mos(mos_q, coeffs)

    scale = max((display[0] * display[1]) / (width * height), 1.0)
    d_upscale = _clamp(v["upscale_u1"] * math.log10(v["upscale_u2"] * (scale - 1.0) + 1.0), 0.0, 100.0)
    d_upscale *= v["device_upscale_factor"][device]

    if framerate < v["temporal_fps_knee"]:
        d_temporal = _clamp(
            v["temporal_t1"] * (v["temporal_fps_knee"] - framerate) / v["temporal_fps_knee"], 0.0, 100.0
        )
    else:
        d_temporal = 0.0

    degradation = _clamp(d_quant + d_upscale + d_temporal, 0.0, 100.0)
    return mos_from_r(100.0 - degradation, coeffs)


def stall_impact(
    stall_count: int, stall_total_s: float, playback_duration_s: float, coeffs: dict = _COEFFS
) -> float:
    """Multiplicative stalling factor in (0, 1]; 1 means unimpaired."""
    s = coeffs["stalling"]
    return math.exp(-stall_count / s["count_scale"]) * math.exp(
        -(stall_total_s / playback_duration_s) / s["ratio_scale"]
    )


def stall_degradation(
    events: Sequence[StallEvent], playback_duration_s: float, coeffs: dict = _COEFFS
) -> float:
    """MOS-scale degradation caused by stalling; 0 for a stall-free session."""
    if playback_duration_s <= 0:
        raise ValueError("playback duration must be > 0")
    events = sorted(events, key=lambda e: e.t_start)
    check_stalls(list(events))
    for e in events:
        if e.t_start < 0 or e.t_end > playback_duration_s + 1e-9:
            raise ValueError(f"stall at t={e.t_start} outside [0, {playback_duration_s}]")
    total = sum(e.duration_s for e in events)
    return 4.0 * (1.0 - stall_impact(len(events), total, playback_duration_s, coeffs))


@dataclass(frozen=True)
class SegmentQuality:
    """A scored media segment: its quality and the media time it carries."""

    score: float
    media_duration_s: float


def _per_second_samples(segments: Sequence[SegmentQuality]) -> np.ndarray:
    durations = np.array([s.media_duration_s for s in segments], dtype=float)
    scores = np.array([s.score for s in segments], dtype=float)
    total = float(durations.sum())
    n_samples = max(1, math.ceil(total))
    mids = np.minimum(np.arange(n_samples) + 0.5, total - 1e-9)
    bounds = np.cumsum(durations)
    idx = np.searchsorted(bounds, mids, side="right")
    idx = np.minimum(idx, len(scores) - 1)
    return scores[idx]


def integrate_mos(
    segments: Sequence[SegmentQuality],
    events: Sequence[StallEvent],
    horizon_s: float,
    session_id: str = "",
    coeffs: dict = _COEFFS,
) -> QoeScore:
    """Session MOS over the prefix window [0, horizon_s].

    Pooling is a recency-weighted mean with a negative bias toward the low
    percentile of the per-second quality series; stalling applies a
    multiplicative impact. With zero stalls and a constant per-segment score
    the result equals that score.
    """
    if horizon_s <= 0:
        raise ValueError("horizon must be > 0")
    if not segments:
        raise InsufficientDataError("no segments within horizon")
    events = sorted(events, key=lambda e: e.t_start)
    check_stalls(list(events))

    p = coeffs["pooling"]
    samples = _per_second_samples(segments)
    k = len(samples)
    weights = 1.0 + p["recency_gain"] * np.exp((np.arange(k) - (k - 1)) / (p["recency_memory"] * k))
    wmean = float(np.average(samples, weights=weights))
    p_low = float(np.percentile(samples, p["low_percentile"]))
    pooled = wmean - p["neg_bias"] * (wmean - p_low)

    stall_total = sum(e.duration_s for e in events)
    impact = stall_impact(len(events), stall_total, horizon_s, coeffs)
    mos = _clamp(1.0 + (pooled - 1.0) * impact, 1.0, 5.0)

    return QoeScore(
        t=horizon_s,
        mos=mos,
        video_quality_mean=_clamp(float(samples.mean()), 1.0, 5.0),
        stall_count=len(events),
        stall_total_s=stall_total,
        session_id=session_id,
    )


def _clip_events(events: Sequence[StallEvent], t: float) -> list[StallEvent]:
    clipped = []
    for e in sorted(events, key=lambda e: e.t_start):
        if e.t_start >= t:
            break
        clipped.append(StallEvent(e.t_start, min(e.duration_s, t - e.t_start)))
    return clipped


def qoe_series(
    records: Sequence[SegmentRecord],
    manifest: Manifest,
    stalls: Sequence[StallEvent],
    step_s: float,
    display: tuple[int, int] = (3840, 2160),
    device: str = "pc",
    end_s: Optional[float] = None,
    coeffs: dict = _COEFFS,
) -> list[QoeScore]:
    """Growing-prefix QoE evolution: one score per step once data exists.

    At each instant t the prefix holds the segments whose download completed
    by t and the stall time accrued by t (ongoing stalls clipped at t).
    Instants with no completed segment yet are skipped.
    """
    if step_s <= 0:
        raise ValueError("step must be > 0")
    completed = sorted((r for r in records if r.success), key=lambda r: r.t_complete)
    if end_s is None:
        end_s = 0.0
        if completed:
            end_s = max(end_s, completed[-1].t_complete)
        for e in stalls:
            end_s = max(end_s, e.t_end)
    session_id = completed[0].session_id if completed else ""

    score_cache: dict[str, float] = {}

    def rep_score(rep_id: str) -> float:
        if rep_id not in score_cache:
            rep = manifest.representation(rep_id)
            score_cache[rep_id] = segment_video_quality(
                rep.bitrate_kbps, rep.width, rep.height, rep.framerate, display, device, coeffs
            )
        return score_cache[rep_id]

    series: list[QoeScore] = []
    n_steps = max(1, math.ceil(end_s / step_s))
    taken = 0
    for k in range(1, n_steps + 1):
        t = k * step_s
        while taken < len(completed) and completed[taken].t_complete <= t:
            taken += 1
        prefix = completed[:taken]
        if not prefix:
            continue
        segments = [
            SegmentQuality(rep_score(r.rep_id), manifest.segment_media_duration(r.segment_index))
            for r in prefix
        ]
        score = integrate_mos(segments, _clip_events(stalls, t), t, session_id, coeffs)
        series.append(score)
    return series
