"""Temporary base-score prediction for CVEs awaiting official analysis.

Descriptions of already-assessed CVEs train a TF-IDF + random-forest
classifier over discrete one-decimal score labels. Predicted scores are
marked as such and are replaced the moment an official assessment lands
(see reconcile).
"""
from __future__ import annotations

import csv
import io
import logging
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

import joblib
import numpy as np
from sklearn.ensemble import RandomForestClassifier

from .errors import DataError, ValidationError
from .features import build_vectorizer
from .records import Provenance, VulnRecord

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
MIN_TRAINING_ROWS = 100


@dataclass
class TrainedModel:
    """Fitted featurizer + classifier and the label set seen in training."""

    featurizer: object
    classifier: RandomForestClassifier
    label_set: list[float]
    metadata: dict = field(default_factory=dict)

    def save(self, path: str | Path) -> None:
        payload = {
            "format_version": MODEL_FORMAT_VERSION,
            "featurizer": self.featurizer,
            "classifier": self.classifier,
            "label_set": self.label_set,
            "metadata": self.metadata,
        }
        joblib.dump(payload, path)

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        path = Path(path)
        if not path.exists():
            raise DataError(f"model file not found: {path}")
        payload = joblib.load(path)
        version = payload.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise DataError(f"unsupported model format version: {version}")
        return cls(
            featurizer=payload["featurizer"],
            classifier=payload["classifier"],
            label_set=payload["label_set"],
            metadata=payload["metadata"],
        )


@dataclass
class EvalReport:
    accuracy: float
    rmse: float
    n_test: int


@dataclass
class ReconcileReport:
    replaced: int
    reassessment_required: bool
    cve_ids: list[str] = field(default_factory=list)


def load_dataset_csv(source: str | Path) -> list[tuple[str, str, float]]:
    """Read (cve_id, description, score) rows from a dataset CSV.

    Rows without a v3 score are skipped; they are prediction targets, not
    training material.
    """
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, Path) else source
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for row in reader:
        score = row.get("cvss_v3_score") or ""
        if not score.strip():
            continue
        rows.append((row["cve_id"], row["description"], float(score)))
    return rows


def split_rows(
    rows: list[tuple[str, str, float]], seed: int, holdout_fraction: float = 0.2
) -> tuple[list, list]:
    """Deterministic shuffle split into (train, heldout)."""
    shuffled = list(rows)
    random.Random(seed).shuffle(shuffled)
    cut = int(round(len(shuffled) * (1.0 - holdout_fraction)))
    return shuffled[:cut], shuffled[cut:]


def train(rows: list[tuple[str, str, float]], split_seed: int = 0) -> TrainedModel:
    """Fit the discrete-score classifier on assessed (id, text, score) rows."""
    if len(rows) < MIN_TRAINING_ROWS:
        raise DataError(
            f"need at least {MIN_TRAINING_ROWS} assessed rows to train, got {len(rows)}"
        )
    for _, description, _ in rows:
        if not description.strip():
            raise ValidationError("training row with empty description")
    texts = [description for _, description, _ in rows]
    # sklearn treats float targets as regression; encode the one-decimal
    # classes as strings and convert back on predict.
    labels = [f"{round(score, 1):.1f}" for _, _, score in rows]
    start = time.perf_counter()
    featurizer = build_vectorizer()
    matrix = featurizer.fit_transform(texts)
    classifier = RandomForestClassifier(
        n_estimators=200, random_state=split_seed, n_jobs=1
    )
    classifier.fit(matrix, labels)
    elapsed = time.perf_counter() - start
    logger.info("trained on %d rows in %.2fs", len(rows), elapsed)
    return TrainedModel(
        featurizer=featurizer,
        classifier=classifier,
        label_set=sorted({float(label) for label in labels}),
        metadata={
            "training_rows": len(rows),
            "split_seed": split_seed,
            "train_seconds": elapsed,
            "version": MODEL_FORMAT_VERSION,
        },
    )


def predict(model: TrainedModel, description: str) -> tuple[float, Provenance]:
    """Predict a discrete score for one description; never guesses on empty input."""
    if not description or not description.strip():
        raise ValidationError("cannot predict a score for an empty description")
    matrix = model.featurizer.transform([description])
    score = float(model.classifier.predict(matrix)[0])
    return score, Provenance.PREDICTED


def evaluate(model: TrainedModel, heldout: list[tuple[str, str, float]]) -> EvalReport:
    """Exact-label accuracy and continuous RMSE on held-out rows."""
    if not heldout:
        raise DataError("held-out set is empty")
    start = time.perf_counter()
    texts = [description for _, description, _ in heldout]
    truth = np.array([round(score, 1) for _, _, score in heldout])
    predicted = model.classifier.predict(model.featurizer.transform(texts)).astype(float)
    truth = truth.astype(float)
    accuracy = float(np.mean(predicted == truth))
    rmse = float(np.sqrt(np.mean((predicted - truth) ** 2)))
    logger.info(
        "evaluated %d rows in %.2fs: accuracy=%.3f rmse=%.3f",
        len(heldout), time.perf_counter() - start, accuracy, rmse,
    )
    return EvalReport(accuracy=accuracy, rmse=rmse, n_test=len(heldout))


def score_missing(store, model: TrainedModel) -> int:
    """Attach predicted scores to stored records that have none at all."""
    updated = 0
    for record in store.all_records():
        if record.base_score is not None:
            continue
        score, provenance = predict(model, record.description)
        store.update_fields(
            record.cve_id,
            cvss_v3_score=score,
            score_provenance=provenance.value,
        )
        updated += 1
    return updated


def reconcile(store, nvd_update: list[VulnRecord]) -> ReconcileReport:
    """Replace predicted scores with freshly assessed official ones.

    Idempotent: records already carrying an official score are merged as
    usual but never counted, and never revert to predicted.
    """
    replaced: list[str] = []
    for incoming in nvd_update:
        if incoming.score_provenance is not Provenance.NVD_ASSESSED:
            continue
        if incoming.cvss_v3_score is None:
            continue
        existing = store.get(incoming.cve_id)
        was_predicted = (
            existing is not None
            and existing.score_provenance is Provenance.PREDICTED
        )
        merged = store.upsert_record(incoming)
        if was_predicted and merged.score_provenance is Provenance.NVD_ASSESSED:
            replaced.append(incoming.cve_id)
    return ReconcileReport(
        replaced=len(replaced),
        reassessment_required=bool(replaced),
        cve_ids=replaced,
    )
