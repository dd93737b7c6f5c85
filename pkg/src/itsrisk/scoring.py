"""Risk reassessment of CVE base scores.

The base score is scaled by how old the CVE is, whether an exploit is
circulating, and whether a patch exists; the final score then blends the
patched and unpatched variants by the exploit probability (EPSS) and adds
a log-scaled term for how many threat-intelligence pulses mention the CVE.
All functions are pure: the assessment time is injected via ScoringConfig,
never read from the wall clock.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, asdict
from datetime import datetime, timezone
from enum import Enum

from . import cvss
from .errors import MissingScoreError, ValidationError
from .records import MetricVector, VulnRecord

logger = logging.getLogger(__name__)

OLDNESS_FLOOR = 0.75
PATCHED_FACTOR = 0.5
EXPLOITED_FACTOR = 1.25
SCORE_CAP = 10.0


class Severity(str, Enum):
    NONE = "None"
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"
    CRITICAL = "Critical"


@dataclass(frozen=True)
class ScoringConfig:
    """Assessment-time inputs for the reassessment equations."""

    now: datetime
    oldness_threshold_days: float = 365.0

    def __post_init__(self):
        if self.oldness_threshold_days <= 0:
            raise ValidationError("oldness_threshold_days must be > 0")
        if self.now.tzinfo is None:
            object.__setattr__(self, "now", self.now.replace(tzinfo=timezone.utc))


@dataclass(frozen=True)
class ScoreBreakdown:
    """Per-CVE factor trace from base score to the final capped score."""

    cve_id: str
    base: float
    from_v2: bool
    oldness_factor: float
    patched_factor: float
    exploited_factor: float
    adjusted: float
    adjusted_unpatched: float
    epss: float
    pulse_term: float
    final: float

    def to_json_dict(self) -> dict:
        return asdict(self)


def cvss_v31_base(metrics: MetricVector) -> float:
    """CVSS v3.1 base score for a complete metric vector."""
    return cvss.base_score(metrics)


def oldness(published_date: datetime, cfg: ScoringConfig) -> float:
    """Age discount: 1.0 for brand-new CVEs, decaying linearly to 0.75."""
    if published_date.tzinfo is None:
        published_date = published_date.replace(tzinfo=timezone.utc)
    delta_days = (cfg.now - published_date).total_seconds() / 86400.0
    if delta_days < 0:
        logger.warning(
            "published_date %s is after the assessment time %s; clamping oldness to 1.0",
            published_date.isoformat(),
            cfg.now.isoformat(),
        )
        return 1.0
    return max(1.0 - 0.25 * delta_days / cfg.oldness_threshold_days, OLDNESS_FLOOR)


def adjusted_score(record: VulnRecord, cfg: ScoringConfig) -> tuple[float, float]:
    """Base score scaled by age, exploit, and patch factors.

    Returns (score, score_unpatched); the second variant pretends no patch
    exists, so the two coincide for unpatched records.
    """
    base = record.base_score
    if base is None:
        raise MissingScoreError(
            f"{record.cve_id} has no CVSS score; predict one before reassessing"
        )
    common = base * oldness(record.published_date, cfg)
    if record.exploited:
        common *= EXPLOITED_FACTOR
    unpatched = common
    patched = common * PATCHED_FACTOR if record.patched else common
    return patched, unpatched


def reassess(record: VulnRecord, cfg: ScoringConfig) -> ScoreBreakdown:
    """Full reassessment: EPSS-weighted patch mix plus the pulse term.

    final = min(10, score*(1-epss) + score_unpatched*epss + log10(max(1, pulses)))
    """
    adjusted, unpatched = adjusted_score(record, cfg)
    pulse_term = math.log10(max(1, record.pulse_count))
    mixed = adjusted * (1.0 - record.epss) + unpatched * record.epss
    final = min(SCORE_CAP, mixed + pulse_term)
    return ScoreBreakdown(
        cve_id=record.cve_id,
        base=record.base_score,
        from_v2=record.cvss_v3_score is None,
        oldness_factor=oldness(record.published_date, cfg),
        patched_factor=PATCHED_FACTOR if record.patched else 1.0,
        exploited_factor=EXPLOITED_FACTOR if record.exploited else 1.0,
        adjusted=adjusted,
        adjusted_unpatched=unpatched,
        epss=record.epss,
        pulse_term=pulse_term,
        final=final,
    )


def severity_band(score: float) -> Severity:
    """Qualitative severity band for a score in [0, 10]."""
    if not 0.0 <= score <= 10.0:
        raise ValidationError(f"score {score} outside [0,10]")
    if score == 0.0:
        return Severity.NONE
    if score < 4.0:
        return Severity.LOW
    if score < 7.0:
        return Severity.MEDIUM
    if score < 9.0:
        return Severity.HIGH
    return Severity.CRITICAL
