"""Density clustering vs a textbook reference, plus assignment plumbing."""
from __future__ import annotations

import random

import numpy as np
import pytest

from itsrisk import clustering, features
from itsrisk.clustering import NOISE, ClusterAssignment
from itsrisk.errors import ValidationError
from itsrisk.features import FeatureMatrix

from conftest import make_record, synth_description

# Three distinct CVE ids wearing near-identical descriptions: the classic
# same-flaw-many-operating-systems pattern the clustering must catch.
TRIPLE = [
    (
        "CVE-2014-0157",
        "Cross-site scripting vulnerability in the dashboard web interface of "
        "the cloud management platform allows remote attackers to inject "
        "arbitrary web script or HTML via the description field of an "
        "orchestration template.",
    ),
    (
        "CVE-2015-3988",
        "Cross-site scripting vulnerability in the dashboard web interface of "
        "the cloud management platform allows remote attackers to inject "
        "arbitrary web script or HTML via the metadata description field of an "
        "orchestration template.",
    ),
    (
        "CVE-2016-4428",
        "Cross-site scripting vulnerability in the dashboard web interface of "
        "the cloud management platform allows remote attackers to inject "
        "arbitrary web script or HTML via a crafted description field of an "
        "orchestration template form.",
    ),
]

DISTINCT_DOCS = [
    ("CVE-2020-1001", "buffer overflow in a tftp server allows code execution via a crafted packet"),
    ("CVE-2020-1002", "sql injection in the billing portal lets attackers run arbitrary sql commands"),
    ("CVE-2020-1003", "denial of service in the mail transfer agent daemon via an oversized header"),
    ("CVE-2020-1004", "use after free in the kernel scheduler allows privilege escalation"),
    ("CVE-2020-1005", "path traversal in the firmware updater overwrites configuration files"),
    ("CVE-2020-1006", "improper certificate validation enables man in the middle spoofing"),
    ("CVE-2020-1007", "information disclosure reads sensitive memory via a negative length field"),
    ("CVE-2020-1008", "race condition in the hypervisor scheduler causes a host crash"),
    ("CVE-2020-1009", "integer overflow in entity parsing corrupts interpreter memory"),
    ("CVE-2020-1010", "symbolic link mishandling lets authenticated users escape the share root"),
    ("CVE-2020-1011", "weak socket permissions allow local session hijacking"),
    ("CVE-2020-1012", "request smuggling through an ambiguous transfer encoding header"),
]


def oracle_dbscan(dist: np.ndarray, eps: float, min_samples: int) -> list[int]:
    """Textbook sequential DBSCAN (pure-Python O(n^2) reference)."""
    n = dist.shape[0]
    UNDEFINED = None
    labels: list = [UNDEFINED] * n
    cluster = -1
    for point in range(n):
        if labels[point] is not UNDEFINED:
            continue
        neighbors = [q for q in range(n) if dist[point][q] <= eps]
        if len(neighbors) < min_samples:
            labels[point] = NOISE
            continue
        cluster += 1
        labels[point] = cluster
        seeds = [q for q in neighbors if q != point]
        i = 0
        while i < len(seeds):
            q = seeds[i]
            i += 1
            if labels[q] == NOISE:
                labels[q] = cluster
            if labels[q] is not UNDEFINED:
                continue
            labels[q] = cluster
            q_neighbors = [r for r in range(n) if dist[q][r] <= eps]
            if len(q_neighbors) >= min_samples:
                seeds.extend(q_neighbors)
    return [NOISE if l is UNDEFINED else l for l in labels]


def canonical(labels: list[int]) -> list[int]:
    mapping: dict[int, int] = {}
    out = []
    for label in labels:
        if label == NOISE:
            out.append(NOISE)
            continue
        mapping.setdefault(label, len(mapping))
        out.append(mapping[label])
    return out


def partition(assignment: ClusterAssignment) -> tuple[set[frozenset], frozenset]:
    groups: dict[int, set[str]] = {}
    noise = set()
    for cve, label in assignment.labels.items():
        if label == NOISE:
            noise.add(cve)
        else:
            groups.setdefault(label, set()).add(cve)
    return {frozenset(g) for g in groups.values()}, frozenset(noise)


def angular_matrix(rng: np.random.Generator, centers, per_blob, std) -> FeatureMatrix:
    angles = np.concatenate([rng.normal(c, std, per_blob) for c in centers])
    points = np.c_[np.cos(angles), np.sin(angles)]
    ids = [f"CVE-2024-{1000 + i}" for i in range(len(angles))]
    return FeatureMatrix(ids=ids, vectors=points, kind="Embedding")


class TestDbscan:
    def test_identical_vectors_co_cluster(self):
        matrix = FeatureMatrix(
            ids=["CVE-2024-0001", "CVE-2024-0002"],
            vectors=np.array([[0.3, 0.7], [0.3, 0.7]]),
            kind="Embedding",
        )
        labels = clustering.cluster_dbscan(matrix, eps=0.001, min_samples=2).labels
        assert labels["CVE-2024-0001"] == labels["CVE-2024-0002"] != NOISE

    def test_distant_points_are_noise(self):
        matrix = FeatureMatrix(
            ids=["CVE-2024-0001", "CVE-2024-0002", "CVE-2024-0003"],
            vectors=np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.5]]),
            kind="Embedding",
        )
        labels = clustering.cluster_dbscan(matrix, eps=0.01, min_samples=2).labels
        assert set(labels.values()) == {NOISE}

    def test_two_blob_set_matches_oracle(self):
        rng = np.random.default_rng(3)
        matrix = angular_matrix(rng, [0.0, 1.5], 15, 0.04)
        assignment = clustering.cluster_dbscan(matrix, eps=0.01, min_samples=4)
        expected = oracle_dbscan(clustering.cosine_distances(matrix), 0.01, 4)
        assert canonical([assignment.labels[i] for i in matrix.ids]) == canonical(expected)

    def test_twenty_synthetic_sets_match_oracle(self):
        rng = np.random.default_rng(20240601)
        for case in range(20):
            n_blobs = int(rng.integers(1, 4))
            centers = rng.uniform(0, 3.0, n_blobs)
            per_blob = int(rng.integers(5, 15))
            std = float(rng.uniform(0.02, 0.08))
            matrix = angular_matrix(rng, centers, per_blob, std)
            # sprinkle isolated points
            stray_angles = rng.uniform(3.5, 6.0, int(rng.integers(0, 5)))
            stray = np.c_[np.cos(stray_angles), np.sin(stray_angles)]
            all_vectors = np.vstack([matrix.dense(), stray])
            ids = [f"CVE-2024-{1000 + i}" for i in range(len(all_vectors))]
            matrix = FeatureMatrix(ids=ids, vectors=all_vectors, kind="Embedding")
            eps = float(rng.uniform(0.005, 0.05))
            min_samples = int(rng.integers(2, 6))
            assignment = clustering.cluster_dbscan(matrix, eps=eps, min_samples=min_samples)
            expected = oracle_dbscan(
                clustering.cosine_distances(matrix), eps, min_samples
            )
            got = canonical([assignment.labels[i] for i in matrix.ids])
            assert got == canonical(expected), f"case {case} diverged"

    def test_parameter_validation(self):
        matrix = FeatureMatrix(
            ids=["CVE-2024-0001"], vectors=np.array([[1.0, 0.0]]), kind="Embedding"
        )
        with pytest.raises(ValidationError):
            clustering.cluster_dbscan(matrix, eps=0.0)
        with pytest.raises(ValidationError):
            clustering.cluster_dbscan(matrix, eps=0.1, min_samples=0)


class TestOptics:
    def test_duplicate_pairs_co_cluster(self):
        vectors = np.array(
            [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [0.7, 0.7], [0.7, 0.7]]
        )
        ids = [f"CVE-2024-{1000 + i}" for i in range(6)]
        matrix = FeatureMatrix(ids=ids, vectors=vectors, kind="Embedding")
        labels = clustering.cluster_optics(matrix, min_samples=2, xi=0.05).labels
        assert labels[ids[0]] == labels[ids[1]] != NOISE
        assert labels[ids[2]] == labels[ids[3]] != NOISE
        assert labels[ids[4]] == labels[ids[5]] != NOISE
        assert len({labels[ids[0]], labels[ids[2]], labels[ids[4]]}) == 3

    def test_single_point_is_noise(self):
        matrix = FeatureMatrix(
            ids=["CVE-2024-0001"], vectors=np.array([[1.0, 0.0]]), kind="Embedding"
        )
        assert clustering.cluster_optics(matrix, min_samples=2).labels == {
            "CVE-2024-0001": NOISE
        }

    def test_two_blob_partition_agrees_with_dbscan(self):
        # min_samples at half the blob size keeps the xi extraction from
        # carving sub-valleys out of one blob.
        rng = np.random.default_rng(7)
        matrix = angular_matrix(rng, [0.0, 1.5], 20, 0.05)
        from_dbscan = clustering.cluster_dbscan(matrix, eps=0.02, min_samples=10)
        from_optics = clustering.cluster_optics(matrix, min_samples=10, xi=0.05)
        assert partition(from_dbscan) == partition(from_optics)

    def test_min_cluster_size_fraction_also_agrees(self):
        rng = np.random.default_rng(11)
        matrix = angular_matrix(rng, [0.0, 1.5], 20, 0.05)
        from_dbscan = clustering.cluster_dbscan(matrix, eps=0.01, min_samples=5)
        from_optics = clustering.cluster_optics(
            matrix, min_samples=5, xi=0.05, min_cluster_size=0.4
        )
        assert partition(from_dbscan) == partition(from_optics)

    def test_parameter_validation(self):
        matrix = FeatureMatrix(
            ids=["CVE-2024-0001"], vectors=np.array([[1.0, 0.0]]), kind="Embedding"
        )
        with pytest.raises(ValidationError):
            clustering.cluster_optics(matrix, min_samples=1)
        with pytest.raises(ValidationError):
            clustering.cluster_optics(matrix, xi=1.5)


class TestPermutationRobustness:
    def test_shuffled_rows_give_same_partition(self):
        rng = np.random.default_rng(5)
        matrix = angular_matrix(rng, [0.0, 1.0, 2.2], 8, 0.03)
        baseline = partition(clustering.cluster_dbscan(matrix, eps=0.01, min_samples=3))
        order = list(range(len(matrix.ids)))
        random.Random(1).shuffle(order)
        shuffled = matrix.take(order)
        reshuffled = partition(
            clustering.cluster_dbscan(shuffled, eps=0.01, min_samples=3)
        )
        assert baseline == reshuffled


class TestAssignClusters:
    def corpus_matrix(self):
        corpus = TRIPLE + DISTINCT_DOCS
        return corpus, features.featurize_bow(corpus)

    def test_triple_shares_one_label_under_defaults(self):
        _, matrix = self.corpus_matrix()
        eps = clustering.default_eps(matrix)
        assignment = clustering.cluster_dbscan(matrix, eps=eps)
        labels = assignment.labels
        triple_labels = {labels[cve] for cve, _ in TRIPLE}
        assert len(triple_labels) == 1
        assert NOISE not in triple_labels
        # the corpus must not degenerate into one all-encompassing cluster
        assert len(set(labels.values())) > 1

    def test_labels_written_to_store(self, store):
        corpus, matrix = self.corpus_matrix()
        for cve_id, description in corpus:
            store.upsert_record(make_record(cve_id, description=description))
        assignment = clustering.cluster_dbscan(
            matrix, eps=clustering.default_eps(matrix)
        )
        report = clustering.assign_clusters(store, assignment)
        assert report.unknown == []
        stored = {r.cve_id: r.cluster_label for r in store.all_records()}
        triple_label = stored["CVE-2014-0157"]
        assert triple_label is not None
        assert stored["CVE-2015-3988"] == triple_label
        assert stored["CVE-2016-4428"] == triple_label

    def test_noise_records_stay_unlabeled(self, store):
        store.upsert_record(make_record("CVE-2024-0001"))
        store.upsert_record(make_record("CVE-2024-0002"))
        store.upsert_record(make_record("CVE-2024-0003"))
        assignment = ClusterAssignment(
            labels={"CVE-2024-0001": 0, "CVE-2024-0002": 0, "CVE-2024-0003": NOISE}
        )
        report = clustering.assign_clusters(store, assignment)
        assert report.updated == 2
        assert store.get("CVE-2024-0003").cluster_label is None

    def test_unknown_ids_reported_not_fatal(self, store):
        store.upsert_record(make_record("CVE-2024-0001"))
        assignment = ClusterAssignment(
            labels={"CVE-2024-0001": 0, "CVE-2024-9999": 0}
        )
        report = clustering.assign_clusters(store, assignment)
        assert report.updated == 1
        assert report.unknown == ["CVE-2024-9999"]

    def test_reassignment_is_idempotent(self, store):
        store.upsert_record(make_record("CVE-2024-0001"))
        assignment = ClusterAssignment(labels={"CVE-2024-0001": 4})
        clustering.assign_clusters(store, assignment)
        snapshot = store.all_records()
        clustering.assign_clusters(store, assignment)
        assert store.all_records() == snapshot


def test_default_eps_scales_with_corpus():
    rng = random.Random(2)
    corpus = [
        (f"CVE-2024-{1000 + i}", synth_description(rng)[0]) for i in range(30)
    ]
    matrix = features.featurize_bow(corpus)
    eps = clustering.default_eps(matrix)
    assert 0.0 < eps <= 2.0
