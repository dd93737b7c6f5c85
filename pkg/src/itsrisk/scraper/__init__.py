"""OSINT harvesting: source clients, rate budgets, and the hourly cycle."""

from .cursors import SourceCursor
from .cycle import CycleReport, Harvester, SourceReport
from .epss import EpssSource, parse_epss_csv
from .exploitdb import ExploitDbSource, parse_mirror_csv
from .nvd import NvdSource, parse_nvd_item
from .osv import OsvSource, parse_osv_doc
from .otx import OtxSource
from .ratelimit import RateBudget
from .transport import (
    Clock,
    FakeClock,
    LiveTransport,
    ReplayTransport,
    SystemClock,
    Transport,
    TransportResponse,
)

__all__ = [
    "Clock",
    "CycleReport",
    "EpssSource",
    "ExploitDbSource",
    "FakeClock",
    "Harvester",
    "LiveTransport",
    "NvdSource",
    "OsvSource",
    "OtxSource",
    "RateBudget",
    "ReplayTransport",
    "SourceCursor",
    "SourceReport",
    "SystemClock",
    "Transport",
    "TransportResponse",
    "parse_epss_csv",
    "parse_mirror_csv",
    "parse_nvd_item",
    "parse_osv_doc",
]
