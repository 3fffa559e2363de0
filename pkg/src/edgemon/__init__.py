"""Multi-layer edge monitoring for vehicular DASH streaming.

Subpackages cover the DASH manifest model, the interposing media proxy, the
UE-side radio/link exporter, the QoE engine, the fusion time-series store,
coverage mapping, and the deterministic trial replay harness.
"""

__version__ = "0.1.0"
