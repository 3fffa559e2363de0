from .modem import ModemStatus, parse_modem_status_line
from .nmea import ChecksumError, format_nmea, nmea_checksum, parse_nmea
from .link import Counters, FileCounterSource, SysfsCounterSource, sample_link
from .trace import TraceFormatError, read_drive_trace, write_drive_trace
from .publisher import Publisher, PublisherStats
from .exporter import export_samples, export_trace_file, samples_from_logs

__all__ = [
    "ChecksumError",
    "Counters",
    "FileCounterSource",
    "ModemStatus",
    "Publisher",
    "PublisherStats",
    "SysfsCounterSource",
    "TraceFormatError",
    "export_samples",
    "export_trace_file",
    "format_nmea",
    "nmea_checksum",
    "parse_modem_status_line",
    "parse_nmea",
    "read_drive_trace",
    "samples_from_logs",
    "write_drive_trace",
]
