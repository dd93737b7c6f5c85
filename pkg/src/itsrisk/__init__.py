"""itsrisk: OSINT-fed vulnerability risk manager for intrusion tolerant systems.

Scrapes vulnerability intelligence into a local store, predicts scores
for unassessed CVEs, clusters descriptions to expose vulnerabilities
shared across operating systems, reassesses risk with EPSS- and
pulse-aware equations, and recommends the most resilient and secure node
configuration.
"""

from . import clustering, configurator, cvss, features, predictor, scoring, scraper
from .config import RunConfig
from .configurator import Configuration, NodeProfile, Policy
from .errors import (
    DataError,
    ItsRiskError,
    MissingScoreError,
    NetworkError,
    ParseError,
    ValidationError,
)
from .records import (
    ExploitRecord,
    MetricVector,
    Provenance,
    PulseRef,
    Status,
    VulnRecord,
)
from .scoring import ScoreBreakdown, ScoringConfig, Severity
from .store import VulnStore

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "DataError",
    "ExploitRecord",
    "ItsRiskError",
    "MetricVector",
    "MissingScoreError",
    "NetworkError",
    "NodeProfile",
    "ParseError",
    "Policy",
    "Provenance",
    "PulseRef",
    "RunConfig",
    "ScoreBreakdown",
    "ScoringConfig",
    "Severity",
    "Status",
    "ValidationError",
    "VulnRecord",
    "VulnStore",
    "clustering",
    "configurator",
    "cvss",
    "features",
    "predictor",
    "scoring",
    "scraper",
]
