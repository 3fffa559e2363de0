from .store import (
    AlignedRecord,
    DegenerateSeriesError,
    FusionStore,
    IngestAck,
    InsufficientPointsError,
    QueryResult,
    SeriesKey,
    load_store,
)
from .server import FusionServer
from .client import FusionClient, IngestError

__all__ = [
    "AlignedRecord",
    "DegenerateSeriesError",
    "FusionClient",
    "FusionServer",
    "FusionStore",
    "IngestAck",
    "IngestError",
    "InsufficientPointsError",
    "QueryResult",
    "SeriesKey",
    "load_store",
]
