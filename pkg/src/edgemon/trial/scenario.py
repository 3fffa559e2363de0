"""Trial scenario definition and loading.

A scenario fully determines a replay run: vehicle path, antenna position,
path-loss and link parameters, player/ABR settings, and the dataset fixture.
Files are TOML (a strict subset parsed here, since the target interpreter
lacks a TOML reader) or JSON, selected by extension.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, asdict
from pathlib import Path

from ..records import GeoPoint


@dataclass(frozen=True)
class Waypoint:
    t_s: float
    lat_deg: float
    lon_deg: float

    @property
    def point(self) -> GeoPoint:
        return GeoPoint(self.lat_deg, self.lon_deg)


@dataclass(frozen=True)
class PathLossParams:
    p0_dbm_at_d0: float = -60.0
    d0_m: float = 10.0
    exponent: float = 2.2
    shadow_sigma_db: float = 0.0

    def __post_init__(self):
        if self.d0_m <= 0 or self.exponent <= 0 or self.shadow_sigma_db < 0:
            raise ValueError("path loss parameters out of range")


@dataclass(frozen=True)
class LinkParams:
    bandwidth_mhz: float = 100.0
    efficiency: float = 0.05
    max_mbps: float = 120.0
    min_mbps: float = 0.05
    noise_floor_dbm: float = -90.0
    interference_db: float = 0.0
    wire_overhead: float = 0.05

    def __post_init__(self):
        if self.bandwidth_mhz <= 0 or self.efficiency <= 0 or self.max_mbps <= 0:
            raise ValueError("link parameters out of range")
        if not 0 <= self.wire_overhead < 0.12:
            raise ValueError("wire_overhead must stay within the L3/L7 tolerance band")


@dataclass(frozen=True)
class AbrParams:
    safety: float = 0.8
    ewma_alpha: float = 0.3
    initial_est_mbps: float = 20.0
    buffer_target_s: float = 12.0
    buffer_max_s: float = 16.0
    resume_threshold_s: float = 2.0

    def __post_init__(self):
        if not 0 < self.safety <= 1 or not 0 < self.ewma_alpha <= 1:
            raise ValueError("safety and ewma_alpha must lie in (0, 1]")
        if self.buffer_max_s <= 0 or self.buffer_target_s <= 0:
            raise ValueError("buffer sizes must be positive")


@dataclass(frozen=True)
class QoeParams:
    step_s: float = 4.0
    display_w: int = 3840
    display_h: int = 2160
    device: str = "pc"


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    antenna: GeoPoint
    waypoints: tuple[Waypoint, ...]
    mpd_path: str
    pathloss: PathLossParams = field(default_factory=PathLossParams)
    link: LinkParams = field(default_factory=LinkParams)
    abr: AbrParams = field(default_factory=AbrParams)
    qoe: QoeParams = field(default_factory=QoeParams)
    duration_s: float = 0.0
    bitrate_staleness_s: float = 8.0

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise ValueError("need at least two waypoints")
        ts = [w.t_s for w in self.waypoints]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("waypoint timestamps must be strictly increasing")
        if self.duration_s == 0.0:
            object.__setattr__(self, "duration_s", ts[-1])
        if self.duration_s > ts[-1]:
            raise ValueError("duration exceeds the waypoint span")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["antenna"] = {"lat_deg": self.antenna.lat_deg, "lon_deg": self.antenna.lon_deg}
        return d


def scenario_from_dict(data: dict, base_dir: Path | None = None) -> Scenario:
    antenna = data["antenna"]
    mpd_path = data["dataset"]["mpd"] if "dataset" in data else data["mpd_path"]
    if base_dir is not None and not Path(mpd_path).is_absolute():
        mpd_path = str((base_dir / mpd_path).resolve())
    return Scenario(
        name=str(data.get("name", "scenario")),
        seed=int(data["seed"]),
        antenna=GeoPoint(float(antenna["lat_deg"]), float(antenna["lon_deg"])),
        waypoints=tuple(
            Waypoint(float(w["t_s"]), float(w["lat_deg"]), float(w["lon_deg"]))
            for w in data["waypoints"]
        ),
        mpd_path=mpd_path,
        pathloss=PathLossParams(**data.get("pathloss", {})),
        link=LinkParams(**data.get("link", {})),
        abr=AbrParams(**data.get("abr", {})),
        qoe=QoeParams(**data.get("qoe", {})),
        duration_s=float(data.get("duration_s", 0.0)),
        bitrate_staleness_s=float(data.get("bitrate_staleness_s", 8.0)),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        data = json.loads(text)
    elif path.suffix == ".toml":
        data = parse_toml_subset(text)
    else:
        raise ValueError(f"unsupported scenario format {path.suffix!r} (use .toml or .json)")
    return scenario_from_dict(data, base_dir=path.parent)


# -- minimal TOML reader -----------------------------------------------------

_BARE_KEY = re.compile(r"^[A-Za-z0-9_-]+$")


class TomlSubsetError(ValueError):
    def __init__(self, message: str, line_no: int):
        super().__init__(f"{message} (line {line_no})")
        self.line_no = line_no


def parse_toml_subset(text: str) -> dict:
    """Parse the TOML subset used by scenario files.

    Supported: ``[table]`` and ``[[array-of-table]]`` headers, bare keys,
    strings, integers, floats, booleans, and one-line arrays of scalars.
    """
    root: dict = {}
    current: dict = root
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("[["):
            if not line.endswith("]]"):
                raise TomlSubsetError("unterminated table-array header", line_no)
            name = line[2:-2].strip()
            if not _BARE_KEY.match(name):
                raise TomlSubsetError(f"bad table-array name {name!r}", line_no)
            current = {}
            root.setdefault(name, []).append(current)
        elif line.startswith("["):
            if not line.endswith("]"):
                raise TomlSubsetError("unterminated table header", line_no)
            name = line[1:-1].strip()
            if not _BARE_KEY.match(name):
                raise TomlSubsetError(f"bad table name {name!r}", line_no)
            current = root.setdefault(name, {})
            if not isinstance(current, dict):
                raise TomlSubsetError(f"table {name!r} conflicts with earlier value", line_no)
        else:
            if "=" not in line:
                raise TomlSubsetError("expected key = value", line_no)
            key, _, value = line.partition("=")
            key = key.strip()
            if not _BARE_KEY.match(key):
                raise TomlSubsetError(f"bad key {key!r}", line_no)
            current[key] = _parse_value(value.strip(), line_no)
    return root


def _strip_comment(line: str) -> str:
    out = []
    in_string = False
    for ch in line:
        if ch == '"':
            in_string = not in_string
        if ch == "#" and not in_string:
            break
        out.append(ch)
    return "".join(out)


def _parse_value(token: str, line_no: int):
    if not token:
        raise TomlSubsetError("missing value", line_no)
    if token.startswith("[") and token.endswith("]"):
        inner = token[1:-1].strip()
        if not inner:
            return []
        return [_parse_value(part.strip(), line_no) for part in _split_array(inner)]
    if token.startswith('"') and token.endswith('"') and len(token) >= 2:
        return token[1:-1]
    if token == "true":
        return True
    if token == "false":
        return False
    try:
        if re.match(r"^[+-]?\d+$", token):
            return int(token)
        return float(token)
    except ValueError:
        raise TomlSubsetError(f"cannot parse value {token!r}", line_no) from None


def _split_array(inner: str) -> list[str]:
    parts = []
    depth = 0
    in_string = False
    start = 0
    for i, ch in enumerate(inner):
        if ch == '"':
            in_string = not in_string
        elif not in_string:
            if ch == "[":
                depth += 1
            elif ch == "]":
                depth -= 1
            elif ch == "," and depth == 0:
                parts.append(inner[start:i])
                start = i + 1
    parts.append(inner[start:])
    return [p for p in parts if p.strip()]
