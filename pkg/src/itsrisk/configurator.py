"""Configuration search: enumerate candidate node sets and rank them by risk.

Security risk sums the reassessed score of every CVE on every node (a CVE
on k nodes counts k times). Resilience risk walks the unordered node pairs
and sums the scores of vulnerabilities the pair shares, either by CVE id
or through a common description cluster; those are the vulnerabilities
that enable parallel attacks on replicas.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping

from .errors import DataError, ValidationError

logger = logging.getLogger(__name__)


class Policy(str, Enum):
    RESILIENCE_FIRST = "ResilienceFirst"
    SECURITY_FIRST = "SecurityFirst"


@dataclass(frozen=True)
class NodeProfile:
    """One OS/software image and the CVE ids resolved against it."""

    name: str
    cpe_pattern: str
    cve_ids: frozenset[str] = field(default_factory=frozenset)


@dataclass
class Configuration:
    """An ordered selection of nodes with its two computed risks."""

    nodes: tuple[NodeProfile, ...]
    security_risk: float = 0.0
    resilience_risk: float = 0.0

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(node.name for node in self.nodes)


def enumerate_configs(
    pool: list[NodeProfile], n: int
) -> Iterator[tuple[NodeProfile, ...]]:
    """Stream all C(|pool|, n) node combinations in deterministic order."""
    if not 1 <= n <= len(pool):
        raise ValidationError(
            f"replica count {n} must be between 1 and pool size {len(pool)}"
        )
    names = [node.name for node in pool]
    if len(set(names)) != len(names):
        raise ValidationError("pool contains duplicate node names")
    return itertools.combinations(pool, n)


def _cluster_of(clusters: Mapping[str, int] | None, cve_id: str) -> int | None:
    if clusters is None:
        return None
    label = clusters.get(cve_id)
    if label is None or label < 0:
        return None  # noise is never shared
    return label


def shared_vulns(
    a: NodeProfile,
    b: NodeProfile,
    clusters: Mapping[str, int] | None = None,
) -> set[str]:
    """CVEs a node pair has in common, directly or via a shared cluster.

    Returns the id intersection plus, for every cluster label present on
    both nodes, all member CVEs of that label found on either node.
    """
    shared = set(a.cve_ids & b.cve_ids)
    if clusters is None:
        return shared
    labels_a = {_cluster_of(clusters, v) for v in a.cve_ids} - {None}
    labels_b = {_cluster_of(clusters, v) for v in b.cve_ids} - {None}
    common = labels_a & labels_b
    if common:
        for cve_id in a.cve_ids | b.cve_ids:
            if _cluster_of(clusters, cve_id) in common:
                shared.add(cve_id)
    return shared


def _score_of(scores: Mapping[str, float], cve_id: str, context: str) -> float:
    try:
        return scores[cve_id]
    except KeyError:
        raise DataError(f"no reassessed score for {cve_id} ({context})") from None


def security_risk(
    nodes: Iterable[NodeProfile], scores: Mapping[str, float]
) -> float:
    """Sum of reassessed scores over all nodes; shared CVEs count per node.

    Summation runs in sorted cve_id order so the float result is identical
    across runs and set-iteration orders.
    """
    total = 0.0
    for node in nodes:
        for cve_id in sorted(node.cve_ids):
            total += _score_of(scores, cve_id, f"node {node.name}")
    return total


def resilience_risk(
    nodes: Iterable[NodeProfile],
    scores: Mapping[str, float],
    clusters: Mapping[str, int] | None = None,
) -> float:
    """Sum of reassessed scores of shared CVEs over all unordered node pairs."""
    total = 0.0
    for a, b in itertools.combinations(list(nodes), 2):
        for cve_id in sorted(shared_vulns(a, b, clusters)):
            total += _score_of(scores, cve_id, f"pair {a.name}/{b.name}")
    return total


def _rank_key(config: Configuration, policy: Policy) -> tuple:
    names = tuple(sorted(config.names))
    if policy is Policy.SECURITY_FIRST:
        return (config.security_risk, config.resilience_risk, names)
    return (config.resilience_risk, config.security_risk, names)


def evaluate(
    nodes: tuple[NodeProfile, ...],
    scores: Mapping[str, float],
    clusters: Mapping[str, int] | None = None,
) -> Configuration:
    return Configuration(
        nodes=nodes,
        security_risk=security_risk(nodes, scores),
        resilience_risk=resilience_risk(nodes, scores, clusters),
    )


def recommend(
    pool: list[NodeProfile],
    n: int,
    policy: Policy,
    scores: Mapping[str, float],
    clusters: Mapping[str, int] | None = None,
    map_fn: Callable[..., Iterable[Configuration]] = map,
) -> list[Configuration]:
    """Rank every n-node configuration, least risky first.

    map_fn may be a parallel map (configurations are independent); the
    final ordering is re-established here, so results do not depend on
    completion order or worker count.
    """
    configs = list(
        map_fn(lambda nodes: evaluate(nodes, scores, clusters), enumerate_configs(pool, n))
    )
    configs.sort(key=lambda c: _rank_key(c, policy))
    return configs


@dataclass
class PeriodMetrics:
    """Per-period evaluation row emitted by evaluation_series."""

    period: str
    injected: int
    recommended: tuple[str, ...]
    security: float            # sum of age/exploit/patch-adjusted scores
    resilience: float          # shared-CVE adjusted score x EPSS, over pairs
    rank_security: float       # the ranking objective values for reference
    rank_resilience: float


def evaluation_series(
    store,
    os_specs: list[tuple[str, str]],
    n: int,
    policy: Policy,
    monthly_batches: list[tuple[str, list]],
    scoring_cfg,
    clusters: Mapping[str, int] | None = None,
) -> list[PeriodMetrics]:
    """Inject period batches into the store and track the recommendation.

    For each (period, records) batch: ingest, rebuild the node profiles,
    reassess every stored CVE, and re-run the recommendation. The emitted
    security metric uses the adjusted (pre-EPSS-mix) score so different
    managers can be compared on one scale; the resilience metric weights
    each shared CVE's adjusted score by its exploit probability. Empty
    batches carry the previous recommendation forward.
    """
    from . import scoring  # local import keeps module load order flat

    series: list[PeriodMetrics] = []
    previous: Configuration | None = None
    for period, batch in monthly_batches:
        store.upsert_many(batch)
        profiles = store.build_os_profiles(os_specs)
        by_name = {p.name: p for p in profiles}
        adjusted: dict[str, float] = {}
        epss: dict[str, float] = {}
        finals: dict[str, float] = {}
        for record in store.all_records():
            if record.base_score is None:
                continue
            breakdown = scoring.reassess(record, scoring_cfg)
            adjusted[record.cve_id] = breakdown.adjusted
            finals[record.cve_id] = breakdown.final
            epss[record.cve_id] = record.epss
        label_map = clusters
        if label_map is None:
            label_map = {
                r.cve_id: r.cluster_label
                for r in store.all_records()
                if r.cluster_label is not None
            }
        if not batch and previous is not None:
            top = previous
        else:
            ranking = recommend(profiles, n, policy, finals, label_map)
            top = ranking[0]
            previous = top
        # Re-resolve the chosen nodes against the current store state.
        nodes = tuple(by_name[name] for name in top.names)
        fig_security = security_risk(nodes, adjusted)
        fig_resilience = 0.0
        for a, b in itertools.combinations(nodes, 2):
            for cve_id in sorted(shared_vulns(a, b, label_map)):
                fig_resilience += adjusted[cve_id] * epss.get(cve_id, 0.0)
        series.append(
            PeriodMetrics(
                period=period,
                injected=len(batch),
                recommended=top.names,
                security=fig_security,
                resilience=fig_resilience,
                rank_security=security_risk(nodes, finals),
                rank_resilience=resilience_risk(nodes, finals, label_map),
            )
        )
    return series
