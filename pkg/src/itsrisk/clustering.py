"""Density clustering of CVE descriptions over cosine distance.

Distinct CVE ids whose descriptions describe the same underlying flaw end
up with one shared cluster label; noise points (label -1) are treated as
singletons downstream and never count as shared.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import OPTICS

from .errors import ValidationError
from .features import FeatureMatrix

logger = logging.getLogger(__name__)

NOISE = -1

DEFAULT_MIN_SAMPLES = 2
DEFAULT_XI = 0.05
DEFAULT_EPS_PERCENTILE = 10.0


@dataclass
class ClusterAssignment:
    """cve_id -> cluster label (-1 marks noise) plus the parameters used."""

    labels: dict[str, int]
    params: dict = field(default_factory=dict)

    def non_noise(self) -> dict[str, int]:
        return {cve: label for cve, label in self.labels.items() if label != NOISE}

    def to_csv(self) -> str:
        lines = ["cve_id,label"]
        lines += [f"{cve},{label}" for cve, label in sorted(self.labels.items())]
        return "\n".join(lines) + "\n"


def cosine_distances(matrix: FeatureMatrix) -> np.ndarray:
    """Pairwise cosine distance in [0, 2]; zero rows are distance 1 to all."""
    dense = matrix.dense()
    norms = np.linalg.norm(dense, axis=1)
    safe = np.where(norms == 0, 1.0, norms)
    unit = dense / safe[:, None]
    dist = 1.0 - unit @ unit.T
    np.clip(dist, 0.0, 2.0, out=dist)
    np.fill_diagonal(dist, 0.0)
    return dist


def default_eps(matrix: FeatureMatrix, percentile: float = DEFAULT_EPS_PERCENTILE) -> float:
    """Per-corpus neighborhood radius: a low percentile of pairwise distance."""
    dist = cosine_distances(matrix)
    n = dist.shape[0]
    if n < 2:
        return 0.5
    upper = dist[np.triu_indices(n, k=1)]
    eps = float(np.percentile(upper, percentile))
    return max(eps, 1e-12)


def cluster_dbscan(
    matrix: FeatureMatrix, eps: float, min_samples: int = DEFAULT_MIN_SAMPLES
) -> ClusterAssignment:
    """Standard DBSCAN over cosine distance.

    Core points have at least min_samples neighbors (themselves included)
    within eps; clusters grow breadth-first from cores in row order, so
    the labeling is deterministic for a fixed input order.
    """
    if eps <= 0:
        raise ValidationError("eps must be > 0")
    if min_samples < 1:
        raise ValidationError("min_samples must be >= 1")
    dist = cosine_distances(matrix)
    n = dist.shape[0]
    neighbors = [np.flatnonzero(dist[i] <= eps) for i in range(n)]
    is_core = np.array([len(neighbors[i]) >= min_samples for i in range(n)])
    labels = np.full(n, NOISE, dtype=int)
    cluster = 0
    for seed in range(n):
        if labels[seed] != NOISE or not is_core[seed]:
            continue
        labels[seed] = cluster
        queue = deque(neighbors[seed])
        while queue:
            point = queue.popleft()
            if labels[point] != NOISE:
                continue
            labels[point] = cluster
            if is_core[point]:
                queue.extend(neighbors[point])
        cluster += 1
    return ClusterAssignment(
        labels={cve: int(label) for cve, label in zip(matrix.ids, labels)},
        params={"algorithm": "dbscan", "eps": eps, "min_samples": min_samples},
    )


def cluster_optics(
    matrix: FeatureMatrix,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    xi: float = DEFAULT_XI,
    min_cluster_size: int | float | None = None,
) -> ClusterAssignment:
    """OPTICS reachability ordering with xi cluster extraction.

    min_cluster_size (a count, or a fraction of the corpus) suppresses the
    xi method's tendency to split dense groups into sub-valleys.
    """
    if min_samples < 2:
        raise ValidationError("min_samples must be >= 2 for OPTICS")
    if not 0.0 < xi < 1.0:
        raise ValidationError("xi must be in (0, 1)")
    n = len(matrix.ids)
    if n < min_samples:
        labels = np.full(n, NOISE, dtype=int)
    else:
        dist = cosine_distances(matrix)
        optics = OPTICS(
            min_samples=min_samples,
            xi=xi,
            metric="precomputed",
            cluster_method="xi",
            min_cluster_size=min_cluster_size,
        )
        with np.errstate(divide="ignore"):  # zero reachability on exact duplicates
            labels = optics.fit_predict(dist)
    return ClusterAssignment(
        labels={cve: int(label) for cve, label in zip(matrix.ids, labels)},
        params={"algorithm": "optics", "min_samples": min_samples, "xi": xi},
    )


@dataclass
class AssignmentReport:
    updated: int
    unknown: list[str] = field(default_factory=list)


def assign_clusters(store, assignment: ClusterAssignment) -> AssignmentReport:
    """Write non-noise labels onto the stored records.

    Noise stays unlabeled (singleton downstream); ids missing from the
    store are reported, not fatal. Re-running the same assignment is a
    no-op for already-labeled records.
    """
    updated = 0
    unknown: list[str] = []
    for cve_id, label in sorted(assignment.labels.items()):
        if store.get(cve_id) is None:
            unknown.append(cve_id)
            continue
        if label == NOISE:
            continue
        store.update_fields(cve_id, cluster_label=label)
        updated += 1
    if unknown:
        logger.warning("assignment referenced %d unknown CVEs: %s", len(unknown), unknown[:5])
    return AssignmentReport(updated=updated, unknown=unknown)


def labels_from_store(store) -> dict[str, int]:
    """Cluster-label map for configurator risk calls."""
    return {
        record.cve_id: record.cluster_label
        for record in store.all_records()
        if record.cluster_label is not None
    }
