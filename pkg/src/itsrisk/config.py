"""Run configuration: a JSON file plus command-line overrides."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

from .configurator import Policy
from .errors import ValidationError
from .records import parse_timestamp


@dataclass
class RunConfig:
    store_path: str = "itsrisk-store"
    oldness_threshold_days: float = 365.0
    replica_count: int = 4
    policy: str = Policy.RESILIENCE_FIRST.value
    cluster_algorithm: str = "dbscan"      # or "optics"
    cluster_min_samples: int = 2
    cluster_xi: float = 0.05
    cluster_eps: float | None = None       # None: per-corpus percentile rule
    fixture_mode: bool = True
    fixture_dir: str | None = None
    exploitdb_mirror: str | None = None
    osv_bulk_archive: str | None = None
    epss_feed: str | None = None
    embeddings_path: str | None = None
    model_path: str = "itsrisk-model.joblib"
    assessment_time: str | None = None     # ISO timestamp; None = wall clock
    workers: int = 1

    def __post_init__(self):
        if self.replica_count < 1:
            raise ValidationError("replica_count must be >= 1")
        if self.oldness_threshold_days <= 0:
            raise ValidationError("oldness_threshold_days must be > 0")
        if self.policy not in (p.value for p in Policy):
            raise ValidationError(f"unknown policy {self.policy!r}")
        if self.cluster_algorithm not in ("dbscan", "optics"):
            raise ValidationError(f"unknown cluster_algorithm {self.cluster_algorithm!r}")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        if self.assessment_time is not None:
            parse_timestamp(self.assessment_time)

    @property
    def ranking_policy(self) -> Policy:
        return Policy(self.policy)

    def now(self) -> datetime:
        if self.assessment_time:
            return parse_timestamp(self.assessment_time)
        return datetime.now(timezone.utc)

    @classmethod
    def load(cls, path: str | Path | None, overrides: dict | None = None) -> "RunConfig":
        """Build from an optional JSON config file plus non-None overrides."""
        data: dict = {}
        if path is not None:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
            known = {f.name for f in fields(cls)}
            unknown = set(raw) - known
            if unknown:
                raise ValidationError(f"unknown config keys: {sorted(unknown)}")
            data.update(raw)
        for key, value in (overrides or {}).items():
            if value is not None:
                data[key] = value
        return cls(**data)
