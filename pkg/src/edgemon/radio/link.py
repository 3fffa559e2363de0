"""L3 throughput sampling from interface byte counters."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..records import LinkSample

_WRAP_32 = 2**32
_WRAP_64 = 2**64


@dataclass(frozen=True)
class Counters:
    rx_bytes: int
    tx_bytes: int


def _delta(prev: int, curr: int) -> int:
    if curr >= prev:
        return curr - prev
    wrap = _WRAP_32 if prev < _WRAP_32 else _WRAP_64
    return curr + wrap - prev


def sample_link(prev: Counters, curr: Counters, dt_s: float, t: float = 0.0) -> LinkSample:
    """Delta the counters over a window of ``dt_s`` seconds ending at ``t``.

    Counter wraps (32- or 64-bit depending on the previous value's width)
    yield the modular, non-negative delta.
    """
    if dt_s <= 0:
        raise ValueError(f"window must be > 0, got {dt_s}")
    return LinkSample(
        t=t,
        rx_bytes_delta=_delta(prev.rx_bytes, curr.rx_bytes),
        tx_bytes_delta=_delta(prev.tx_bytes, curr.tx_bytes),
        window_s=dt_s,
    )


class SysfsCounterSource:
    """Reads /sys/class/net/<iface>/statistics byte counters."""

    def __init__(self, iface: str, root: str = "/sys/class/net"):
        self._rx = Path(root) / iface / "statistics" / "rx_bytes"
        self._tx = Path(root) / iface / "statistics" / "tx_bytes"

    def read(self) -> Counters:
        return Counters(
            rx_bytes=int(self._rx.read_text().strip()),
            tx_bytes=int(self._tx.read_text().strip()),
        )


class FileCounterSource:
    """Reads 'rx_bytes tx_bytes' from a single text file (replay/tests)."""

    def __init__(self, path: str | Path):
        self._path = Path(path)

    def read(self) -> Counters:
        rx, tx = self._path.read_text().split()
        return Counters(rx_bytes=int(rx), tx_bytes=int(tx))
