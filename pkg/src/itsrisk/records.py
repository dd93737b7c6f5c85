"""Domain records: vulnerabilities, CVSS metric vectors, exploits, pulses.

Everything here is a plain dataclass with explicit validation; persistence
lives in `store`, math lives in `cvss` and `scoring`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from enum import Enum

from .errors import ValidationError

CVE_ID_RE = re.compile(r"^CVE-\d{4}-\d{4,}$")

# Canonical CVSS v3.1 vector order and the allowed value letters per metric.
_METRIC_VALUES = {
    "AV": ("N", "A", "L", "P"),
    "AC": ("L", "H"),
    "PR": ("N", "L", "H"),
    "UI": ("N", "R"),
    "S": ("U", "C"),
    "C": ("N", "L", "H"),
    "I": ("N", "L", "H"),
    "A": ("N", "L", "H"),
}
_METRIC_ORDER = ("AV", "AC", "PR", "UI", "S", "C", "I", "A")


class Status(str, Enum):
    RECEIVED = "Received"
    ANALYZED = "Analyzed"


class Provenance(str, Enum):
    NVD_ASSESSED = "NvdAssessed"
    PREDICTED = "Predicted"


@dataclass(frozen=True)
class MetricVector:
    """A complete CVSS v3.1 base metric vector."""

    attack_vector: str
    attack_complexity: str
    privileges_required: str
    user_interaction: str
    scope: str
    confidentiality: str
    integrity: str
    availability: str

    def __post_init__(self):
        for key, value in zip(_METRIC_ORDER, self._values()):
            if value not in _METRIC_VALUES[key]:
                raise ValidationError(f"invalid CVSS metric {key}:{value!r}")

    def _values(self) -> tuple[str, ...]:
        return (
            self.attack_vector,
            self.attack_complexity,
            self.privileges_required,
            self.user_interaction,
            self.scope,
            self.confidentiality,
            self.integrity,
            self.availability,
        )

    def to_string(self) -> str:
        """Serialize to the canonical "CVSS:3.1/AV:../.." vector string."""
        parts = "/".join(f"{k}:{v}" for k, v in zip(_METRIC_ORDER, self._values()))
        return f"CVSS:3.1/{parts}"

    @classmethod
    def from_string(cls, vector: str) -> "MetricVector":
        """Parse a CVSS v3.x vector string; metric order is not significant."""
        head, _, rest = vector.partition("/")
        if not head.startswith("CVSS:3"):
            raise ValidationError(f"not a CVSS v3 vector string: {vector!r}")
        seen: dict[str, str] = {}
        for piece in rest.split("/"):
            key, _, value = piece.partition(":")
            if key not in _METRIC_VALUES:
                continue  # temporal/environmental metrics are ignored
            seen[key] = value
        missing = [k for k in _METRIC_ORDER if k not in seen]
        if missing:
            raise ValidationError(f"vector missing base metrics {missing}: {vector!r}")
        return cls(*(seen[k] for k in _METRIC_ORDER))


def _ensure_utc(value: datetime, name: str) -> datetime:
    if value.tzinfo is None:
        return value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 timestamp, tolerating a trailing Z, into UTC."""
    try:
        parsed = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ValidationError(f"bad timestamp {raw!r}: {exc}") from None
    return _ensure_utc(parsed, "timestamp")


@dataclass
class VulnRecord:
    """One CVE with everything the scoring equations consume."""

    cve_id: str
    description: str
    published_date: datetime
    last_modified: datetime
    status: Status = Status.RECEIVED
    cvss_v3_metrics: MetricVector | None = None
    cvss_v3_score: float | None = None
    cvss_v2_score: float | None = None
    patched: bool = False
    exploited: bool = False
    epss: float = 0.0
    pulse_count: int = 0
    affected_cpes: list[str] = field(default_factory=list)
    cluster_label: int | None = None
    score_provenance: Provenance = Provenance.NVD_ASSESSED

    def __post_init__(self):
        if not CVE_ID_RE.match(self.cve_id):
            raise ValidationError(f"malformed CVE id: {self.cve_id!r}")
        self.published_date = _ensure_utc(self.published_date, "published_date")
        self.last_modified = _ensure_utc(self.last_modified, "last_modified")
        if self.published_date > self.last_modified:
            raise ValidationError(
                f"{self.cve_id}: published_date after last_modified"
            )
        if not 0.0 <= self.epss <= 1.0:
            raise ValidationError(f"{self.cve_id}: epss {self.epss} outside [0,1]")
        if self.pulse_count < 0:
            raise ValidationError(f"{self.cve_id}: negative pulse_count")
        for score_name in ("cvss_v3_score", "cvss_v2_score"):
            score = getattr(self, score_name)
            if score is not None and not 0.0 <= score <= 10.0:
                raise ValidationError(f"{self.cve_id}: {score_name} outside [0,10]")
        # A v3 score may only be present on analyzed or predicted records,
        # and those must carry one.
        has_v3 = self.cvss_v3_score is not None
        assessed = (
            self.status is Status.ANALYZED
            or self.score_provenance is Provenance.PREDICTED
        )
        if has_v3 != assessed:
            raise ValidationError(
                f"{self.cve_id}: cvss_v3_score presence inconsistent with "
                f"status={self.status.value}/provenance={self.score_provenance.value}"
            )

    @property
    def base_score(self) -> float | None:
        """Preferred base score: v3 when present, else the raw v2 score."""
        if self.cvss_v3_score is not None:
            return self.cvss_v3_score
        return self.cvss_v2_score

    def to_doc(self) -> dict:
        doc = asdict(self)
        doc["published_date"] = self.published_date.isoformat()
        doc["last_modified"] = self.last_modified.isoformat()
        doc["status"] = self.status.value
        doc["score_provenance"] = self.score_provenance.value
        doc["cvss_v3_metrics"] = (
            self.cvss_v3_metrics.to_string() if self.cvss_v3_metrics else None
        )
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "VulnRecord":
        data = dict(doc)
        data["published_date"] = parse_timestamp(data["published_date"])
        data["last_modified"] = parse_timestamp(data["last_modified"])
        data["status"] = Status(data["status"])
        data["score_provenance"] = Provenance(data["score_provenance"])
        if data.get("cvss_v3_metrics"):
            data["cvss_v3_metrics"] = MetricVector.from_string(data["cvss_v3_metrics"])
        return cls(**data)


@dataclass
class ExploitRecord:
    """One public exploit entry, mirroring the searchsploit index fields."""

    exploit_id: str
    title: str
    url: str
    local_path: str
    codes: list[str] = field(default_factory=list)
    verified: bool = False
    file_type: str = ""

    def __post_init__(self):
        for code in self.codes:
            if not CVE_ID_RE.match(code):
                raise ValidationError(
                    f"exploit {self.exploit_id}: bad CVE code {code!r}"
                )

    def to_doc(self) -> dict:
        return asdict(self)

    @classmethod
    def from_doc(cls, doc: dict) -> "ExploitRecord":
        return cls(**doc)


@dataclass
class PulseRef:
    """A curated threat-intelligence bundle referencing one or more CVEs."""

    pulse_id: str
    cve_ids: list[str] = field(default_factory=list)
    created: datetime | None = None
    tags: list[str] = field(default_factory=list)

    def to_doc(self) -> dict:
        doc = asdict(self)
        doc["created"] = self.created.isoformat() if self.created else None
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "PulseRef":
        data = dict(doc)
        if data.get("created"):
            data["created"] = parse_timestamp(data["created"])
        return cls(**data)
