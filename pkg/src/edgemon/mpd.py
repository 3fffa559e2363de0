"""DASH Media Presentation Description handling.

Covers the subset used by the monitored service: static presentations with a
single period, a single video adaptation set, and number-based
``SegmentTemplate`` addressing. Manifests are immutable values; rewriting
produces a new manifest.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from math import ceil
from urllib.parse import urlsplit, urljoin

MPD_NS = "urn:mpeg:dash:schema:mpd:2011"


class MpdError(Exception):
    """Base class for manifest errors."""


class MpdParseError(MpdError):
    """Raised for malformed XML; carries the byte offset of the failure."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class MpdSemanticError(MpdError):
    """Raised when the XML is well-formed but a required element is unusable."""

    def __init__(self, message: str, element: str):
        super().__init__(message)
        self.element = element


class SegmentRangeError(MpdError):
    """Raised for an unknown representation id or out-of-range segment index."""


_DURATION_RE = re.compile(
    r"^P(?:(?P<days>\d+(?:\.\d+)?)D)?"
    r"(?:T(?:(?P<hours>\d+(?:\.\d+)?)H)?"
    r"(?:(?P<minutes>\d+(?:\.\d+)?)M)?"
    r"(?:(?P<seconds>\d+(?:\.\d+)?)S)?)?$"
)


def parse_iso_duration(text: str) -> float:
    """Parse an ISO 8601 duration (PnDTnHnMnS subset) into seconds."""
    m = _DURATION_RE.match(text.strip())
    if not m or text.strip() in ("P", "PT"):
        raise ValueError(f"invalid ISO 8601 duration: {text!r}")
    days = float(m.group("days") or 0)
    hours = float(m.group("hours") or 0)
    minutes = float(m.group("minutes") or 0)
    seconds = float(m.group("seconds") or 0)
    return days * 86400 + hours * 3600 + minutes * 60 + seconds


def format_iso_duration(seconds: float) -> str:
    if seconds == int(seconds):
        return f"PT{int(seconds)}S"
    return f"PT{seconds:g}S"


def _parse_framerate(text: str) -> float:
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _format_framerate(fr: float) -> str:
    return str(int(fr)) if float(fr).is_integer() else f"{fr:g}"


@dataclass(frozen=True)
class Representation:
    """One rung of the bitrate ladder."""

    id: str
    bitrate_kbps: float
    width: int
    height: int
    framerate: float
    codec: str = "hvc1"

    def __post_init__(self):
        if self.bitrate_kbps <= 0:
            raise ValueError(f"representation {self.id!r}: bitrate must be > 0")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"representation {self.id!r}: resolution must be >= 1x1")
        if self.framerate <= 0:
            raise ValueError(f"representation {self.id!r}: framerate must be > 0")


@dataclass(frozen=True)
class Manifest:
    """Parsed MPD for a static, single-adaptation-set presentation.

    ``representations`` is ordered strictly ascending by bitrate;
    ``segment_template`` addresses media by ``$RepresentationID$`` and
     1-based ``$Number$``.
    """

    media_duration_s: float
    segment_duration_s: float
    base_url: str
    representations: tuple[Representation, ...]
    segment_template: str
    ignored_elements: tuple[str, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.media_duration_s <= 0:
            raise ValueError("media duration must be > 0")
        if self.segment_duration_s <= 0:
            raise ValueError("segment duration must be > 0")
        if not self.representations:
            raise ValueError("manifest needs at least one representation")
        bitrates = [r.bitrate_kbps for r in self.representations]
        if any(b2 <= b1 for b1, b2 in zip(bitrates, bitrates[1:])):
            raise ValueError("representations must be strictly ascending by bitrate")
        ids = [r.id for r in self.representations]
        if len(set(ids)) != len(ids):
            raise ValueError("representation ids must be unique")
        parts = urlsplit(self.base_url)
        if not parts.scheme or not parts.netloc:
            raise ValueError(f"base_url must be absolute: {self.base_url!r}")
        if "$Number$" not in self.segment_template:
            raise ValueError("segment_template must contain $Number$")

    @property
    def segment_count(self) -> int:
        return ceil(self.media_duration_s / self.segment_duration_s)

    def segment_media_duration(self, index: int) -> float:
        """Media seconds carried by segment ``index`` (last one may be short)."""
        if not 1 <= index <= self.segment_count:
            raise SegmentRangeError(f"segment index {index} out of range 1..{self.segment_count}")
        if index < self.segment_count:
            return self.segment_duration_s
        return self.media_duration_s - self.segment_duration_s * (self.segment_count - 1)

    def representation(self, rep_id: str) -> Representation:
        for rep in self.representations:
            if rep.id == rep_id:
                return rep
        raise SegmentRangeError(f"unknown representation id {rep_id!r}")


def parse_mpd(xml_bytes: bytes) -> Manifest:
    """Parse MPD bytes into a Manifest.

    Unknown elements and attributes are ignored (their tags are kept on the
    manifest for diagnostics). Raises :class:`MpdParseError` for malformed
    XML and :class:`MpdSemanticError` when a required element is missing.
    """
    try:
        root = ET.fromstring(xml_bytes)
    except ET.ParseError as exc:
        line, col = exc.position
        offset = _byte_offset(xml_bytes, line, col)
        raise MpdParseError(str(exc.msg if hasattr(exc, "msg") else exc), offset) from exc

    ns = {"d": MPD_NS}
    if not root.tag.endswith("MPD"):
        raise MpdSemanticError(f"root element is {root.tag!r}, expected MPD", "MPD")

    ignored: list[str] = []

    dur_attr = root.get("mediaPresentationDuration")
    if dur_attr is None:
        raise MpdSemanticError("mediaPresentationDuration absent", "MPD@mediaPresentationDuration")
    media_duration = parse_iso_duration(dur_attr)

    base_el = root.find("d:BaseURL", ns) if root.tag.startswith("{") else root.find("BaseURL")
    if base_el is None or not (base_el.text or "").strip():
        raise MpdSemanticError("BaseURL absent", "BaseURL")
    base_url = base_el.text.strip()
    if not base_url.endswith("/"):
        base_url += "/"

    def find(parent, tag):
        return parent.find(f"d:{tag}", ns) if parent.tag.startswith("{") else parent.find(tag)

    def findall(parent, tag):
        return parent.findall(f"d:{tag}", ns) if parent.tag.startswith("{") else parent.findall(tag)

    period = find(root, "Period")
    if period is None:
        raise MpdSemanticError("Period absent", "Period")
    aset = find(period, "AdaptationSet")
    if aset is None:
        raise MpdSemanticError("AdaptationSet absent", "AdaptationSet")

    tmpl_el = find(aset, "SegmentTemplate")
    if tmpl_el is None:
        raise MpdSemanticError("SegmentTemplate absent", "SegmentTemplate")
    media = tmpl_el.get("media")
    if not media:
        raise MpdSemanticError("SegmentTemplate@media absent", "SegmentTemplate@media")
    timescale = float(tmpl_el.get("timescale", "1"))
    seg_dur_attr = tmpl_el.get("duration")
    if seg_dur_attr is None:
        raise MpdSemanticError("SegmentTemplate@duration absent", "SegmentTemplate@duration")
    segment_duration = float(seg_dur_attr) / timescale

    reps = []
    for el in findall(aset, "Representation"):
        rep_id = el.get("id")
        bandwidth = el.get("bandwidth")
        if rep_id is None or bandwidth is None:
            raise MpdSemanticError("Representation needs id and bandwidth", "Representation")
        reps.append(
            Representation(
                id=rep_id,
                bitrate_kbps=float(bandwidth) / 1000.0,
                width=int(el.get("width", "0") or 0),
                height=int(el.get("height", "0") or 0),
                framerate=_parse_framerate(el.get("frameRate", "30")),
                codec=el.get("codecs", "hvc1"),
            )
        )
    if not reps:
        raise MpdSemanticError("zero representations", "Representation")
    reps.sort(key=lambda r: r.bitrate_kbps)

    known = {"BaseURL", "Period", "AdaptationSet", "SegmentTemplate", "Representation"}
    for el in root.iter():
        tag = el.tag.rsplit("}", 1)[-1]
        if tag not in known and tag != "MPD":
            ignored.append(tag)

    return Manifest(
        media_duration_s=media_duration,
        segment_duration_s=segment_duration,
        base_url=base_url,
        representations=tuple(reps),
        segment_template=media,
        ignored_elements=tuple(sorted(set(ignored))),
    )


def _byte_offset(xml_bytes: bytes, line: int, col: int) -> int:
    lines = xml_bytes.split(b"\n")
    return sum(len(l) + 1 for l in lines[: line - 1]) + col


def serialize_mpd(m: Manifest) -> bytes:
    """Serialize a Manifest canonically; parse(serialize(m)) == m."""
    timescale = 1000
    root = ET.Element("MPD")
    root.set("xmlns", MPD_NS)
    root.set("type", "static")
    root.set("mediaPresentationDuration", format_iso_duration(m.media_duration_s))
    root.set("profiles", "urn:mpeg:dash:profile:isoff-on-demand:2011")
    base = ET.SubElement(root, "BaseURL")
    base.text = m.base_url
    period = ET.SubElement(root, "Period")
    aset = ET.SubElement(period, "AdaptationSet")
    aset.set("contentType", "video")
    tmpl = ET.SubElement(aset, "SegmentTemplate")
    tmpl.set("media", m.segment_template)
    tmpl.set("duration", str(int(round(m.segment_duration_s * timescale))))
    tmpl.set("timescale", str(timescale))
    tmpl.set("startNumber", "1")
    for rep in m.representations:
        el = ET.SubElement(aset, "Representation")
        el.set("id", rep.id)
        el.set("bandwidth", str(int(round(rep.bitrate_kbps * 1000))))
        el.set("width", str(rep.width))
        el.set("height", str(rep.height))
        el.set("frameRate", _format_framerate(rep.framerate))
        el.set("codecs", rep.codec)
    ET.indent(root)
    return b'<?xml version="1.0" encoding="utf-8"?>\n' + ET.tostring(root, encoding="utf-8")


def rewrite_base_url(m: Manifest, proxy_origin: str) -> Manifest:
    """Point the manifest at ``proxy_origin``, keeping the original path suffix.

    ``http://cdn.example/v/`` rewritten to ``http://mec.local:8080/`` becomes
    ``http://mec.local:8080/v/``. Rewriting with the same origin twice is a
    fixed point.
    """
    origin = urlsplit(proxy_origin)
    if not origin.scheme or not origin.netloc:
        raise ValueError(f"proxy origin must be absolute: {proxy_origin!r}")
    if m.base_url.startswith(proxy_origin.rstrip("/") + "/") or m.base_url == proxy_origin:
        return m
    old = urlsplit(m.base_url)
    prefix = origin.path.rstrip("/")
    new_path = prefix + old.path if old.path.startswith("/") else prefix + "/" + old.path
    new_base = f"{origin.scheme}://{origin.netloc}{new_path}"
    if not new_base.endswith("/"):
        new_base += "/"
    return replace(m, base_url=new_base)


def segment_url(m: Manifest, rep_id: str, index: int) -> str:
    """Absolute URL of segment ``index`` (1-based) of representation ``rep_id``."""
    m.representation(rep_id)
    if not 1 <= index <= m.segment_count:
        raise SegmentRangeError(f"segment index {index} out of range 1..{m.segment_count}")
    rel = m.segment_template.replace("$RepresentationID$", rep_id).replace("$Number$", str(index))
    return urljoin(m.base_url, rel)


def template_matcher(template: str) -> re.Pattern:
    """Regex matching a template-expanded file name, with rep/num groups."""
    pattern = re.escape(template)
    pattern = pattern.replace(re.escape("$RepresentationID$"), r"(?P<rep>[^/]+?)")
    pattern = pattern.replace(re.escape("$Number$"), r"(?P<num>\d+)")
    return re.compile("^" + pattern + "$")
