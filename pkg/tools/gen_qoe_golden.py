#!/usr/bin/env python3
"""Regenerate the frozen QoE golden corpus under golden/qoe/.

This is a deliberately plain, scalar re-statement of the documented QoE
formulas (see README "QoE model"), kept separate from the package engine so
the two can be checked against each other. It reads only the coefficient
file and the case definitions below.

Usage: python tools/gen_qoe_golden.py
"""

import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
COEFFS = json.loads((ROOT / "src/edgemon/qoe/coefficients.json").read_text())

MOS_MIN = COEFFS["scale"]["mos_min"]
MOS_MAX = COEFFS["scale"]["mos_max"]


def clamp(x, lo, hi):
    return max(lo, min(hi, x))


def mos_from_r(r):
    r = clamp(r, 0.0, 100.0)
    return MOS_MIN + (MOS_MAX - MOS_MIN) / 100.0 * r + r * (r - 60.0) * (100.0 - r) * 7.0e-6


def r_from_mos(mos):
    mos = clamp(mos, MOS_MIN, MOS_MAX)
    lo, hi = 0.0, 100.0
    for _ in range(80):
        mid = (lo + hi) / 2.0
        if mos_from_r(mid) < mos:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def video_quality(bitrate_kbps, width, height, framerate, display_w, display_h, device="pc"):
    v = COEFFS["video"]
    bpp = bitrate_kbps * 1000.0 / (width * height * framerate)
    span = math.log(v["bpp_high"]) - math.log(v["bpp_low"])
    q = clamp((math.log(v["bpp_high"]) - math.log(bpp)) / span, 0.0, 1.0)
    mos_q = clamp(v["mosq_a"] + v["mosq_b"] * math.exp(v["mosq_c"] * q), MOS_MIN, MOS_MAX)
    d_q = 100.0 - r_from_mos(mos_q)
    scale = max((display_w * display_h) / (width * height), 1.0)
    d_u = clamp(v["upscale_u1"] * math.log10(v["upscale_u2"] * (scale - 1.0) + 1.0), 0.0, 100.0)
    d_u *= v["device_upscale_factor"][device]
    if framerate < v["temporal_fps_knee"]:
        d_t = clamp(v["temporal_t1"] * (v["temporal_fps_knee"] - framerate) / v["temporal_fps_knee"], 0.0, 100.0)
    else:
        d_t = 0.0
    d = clamp(d_q + d_u + d_t, 0.0, 100.0)
    return mos_from_r(100.0 - d)


def stall_impact(n_stalls, total_stall_s, playback_duration_s):
    s = COEFFS["stalling"]
    return math.exp(-n_stalls / s["count_scale"]) * math.exp(
        -(total_stall_s / playback_duration_s) / s["ratio_scale"]
    )


def stall_degradation(events, playback_duration_s):
    n = len(events)
    total = sum(d for _, d in events)
    return 4.0 * (1.0 - stall_impact(n, total, playback_duration_s))


def percentile_linear(sorted_xs, pct):
    k = len(sorted_xs)
    if k == 1:
        return sorted_xs[0]
    h = (k - 1) * pct / 100.0
    lo = math.floor(h)
    hi = math.ceil(h)
    return sorted_xs[lo] + (h - lo) * (sorted_xs[hi] - sorted_xs[lo])


def integrate(segment_scores_durations, events, horizon_s):
    """segment_scores_durations: list of (score, media_duration_s) in play order."""
    p = COEFFS["pooling"]
    total_media = sum(d for _, d in segment_scores_durations)
    n_samples = max(1, math.ceil(total_media))
    samples = []
    for k in range(n_samples):
        mid = min((k + 0.5), total_media - 1e-9)
        acc = 0.0
        score = segment_scores_durations[-1][0]
        for s, d in segment_scores_durations:
            if mid < acc + d:
                score = s
                break
            acc += d
        samples.append(score)
    weights = [
        1.0 + p["recency_gain"] * math.exp((k - (n_samples - 1)) / (p["recency_memory"] * n_samples))
        for k in range(n_samples)
    ]
    wmean = sum(w * x for w, x in zip(weights, samples)) / sum(weights)
    p_low = percentile_linear(sorted(samples), p["low_percentile"])
    pooled = wmean - p["neg_bias"] * (wmean - p_low)
    n = len(events)
    total_stall = sum(d for _, d in events)
    mos = 1.0 + (pooled - 1.0) * stall_impact(n, total_stall, horizon_s)
    return clamp(mos, 1.0, 5.0)


LADDER = [
    (145, 320, 180), (211, 400, 224), (307, 496, 280), (446, 640, 360),
    (649, 800, 450), (944, 992, 558), (1373, 1248, 702), (1997, 1568, 882),
    (2904, 1968, 1108), (4224, 2464, 1386), (6144, 3104, 1746), (8937, 3888, 2188),
    (12999, 4880, 2744), (18907, 6128, 3448), (27500, 7680, 4320),
]
DISPLAY = (3840, 2160)


def video_quality_cases():
    cases = []
    for br, w, h in LADDER:
        cases.append({"bitrate_kbps": br, "width": w, "height": h, "framerate": 30.0,
                      "display_w": DISPLAY[0], "display_h": DISPLAY[1], "device": "pc"})
    extra = [
        (1997, 1568, 882, 15.0, "pc"),
        (1997, 1568, 882, 60.0, "pc"),
        (6144, 3104, 1746, 30.0, "mobile"),
        (500, 640, 360, 30.0, "pc"),
        (100000, 3840, 2160, 30.0, "pc"),
    ]
    for br, w, h, fps, device in extra:
        cases.append({"bitrate_kbps": br, "width": w, "height": h, "framerate": fps,
                      "display_w": DISPLAY[0], "display_h": DISPLAY[1], "device": device})
    for c in cases:
        c["expected_score"] = video_quality(c["bitrate_kbps"], c["width"], c["height"],
                                            c["framerate"], c["display_w"], c["display_h"], c["device"])
    return cases


def stall_cases():
    patterns = [
        [],
        [(10.0, 1.0)],
        [(10.0, 5.0)],
        [(10.0, 30.0)],
        [(10.0, 1.0), (50.0, 1.0)],
        [(10.0, 2.0), (50.0, 2.0), (90.0, 2.0)],
        [(5.0, 0.5), (20.0, 0.5), (40.0, 0.5), (60.0, 0.5), (80.0, 0.5)],
        [(0.0, 10.0)],
        [(300.0, 20.0)],
        [(100.0, 4.0), (200.0, 8.0)],
    ]
    cases = []
    for events in patterns:
        cases.append({
            "events": [{"t_start": t, "duration_s": d} for t, d in events],
            "playback_duration_s": 322.0,
            "expected_degradation": stall_degradation(events, 322.0),
        })
    return cases


def session_cases():
    rng = random.Random(20230711)
    cases = []

    def ladder_quality(idx):
        br, w, h = LADDER[idx]
        return video_quality(br, w, h, 30.0, DISPLAY[0], DISPLAY[1], "pc")

    # constant-quality sessions across the ladder, stall free
    for idx in (0, 4, 7, 11, 14):
        segs = [(idx, 4.0)] * 80 + [(idx, 2.0)]
        cases.append((segs, [], 322.0))

    # declining / recovering trajectories
    down = [(14 - min(i // 6, 14), 4.0) for i in range(80)] + [(0, 2.0)]
    cases.append((down, [], 322.0))
    vee = [(max(14 - i // 3, 0), 4.0) for i in range(40)] + [(min(i // 3, 14), 4.0) for i in range(40)] + [(14, 2.0)]
    cases.append((vee, [], 322.0))

    # constant quality with the stall patterns
    for events in ([(100.0, 10.0)], [(50.0, 2.0), (150.0, 2.0)], [(10.0, 30.0)],
                   [(200.0, 1.0)], [(60.0, 5.0), (180.0, 5.0), (280.0, 5.0)]):
        segs = [(10, 4.0)] * 80 + [(10, 2.0)]
        cases.append((segs, events, 322.0))

    # randomized trajectories + stalls
    for _ in range(8):
        segs = []
        level = rng.randrange(15)
        for _i in range(81):
            level = max(0, min(14, level + rng.choice((-2, -1, 0, 0, 1, 2))))
            segs.append((level, 4.0 if _i < 80 else 2.0))
        events = []
        t = 20.0
        for _j in range(rng.randrange(4)):
            dur = round(rng.uniform(0.5, 12.0), 3)
            events.append((t, dur))
            t += dur + rng.uniform(10.0, 60.0)
        cases.append((segs, events, 322.0))

    # short sessions (prefix-style)
    cases.append(([(7, 4.0)] * 3, [], 12.0))
    cases.append(([(14, 4.0)] * 10, [(8.0, 3.0)], 43.0))

    out = []
    for segs, events, horizon in cases:
        scored = [(ladder_quality(idx), dur) for idx, dur in segs]
        out.append({
            "segments": [
                {"bitrate_kbps": LADDER[idx][0], "width": LADDER[idx][1], "height": LADDER[idx][2],
                 "framerate": 30.0, "media_duration_s": dur}
                for idx, dur in segs
            ],
            "display_w": DISPLAY[0],
            "display_h": DISPLAY[1],
            "device": "pc",
            "events": [{"t_start": t, "duration_s": d} for t, d in events],
            "horizon_s": horizon,
            "expected_mos": integrate(scored, events, horizon),
        })
    return out


def main():
    outdir = ROOT / "golden" / "qoe"
    outdir.mkdir(parents=True, exist_ok=True)
    meta = {
        "generator": "tools/gen_qoe_golden.py",
        "coefficients_version": COEFFS["version"],
    }
    files = {
        "video_quality.json": {"meta": meta, "cases": video_quality_cases()},
        "stall_degradation.json": {"meta": meta, "cases": stall_cases()},
        "sessions.json": {"meta": meta, "cases": session_cases()},
    }
    for name, payload in files.items():
        path = outdir / name
        path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
        print(f"wrote {path} ({len(payload['cases'])} cases)")


if __name__ == "__main__":
    main()
