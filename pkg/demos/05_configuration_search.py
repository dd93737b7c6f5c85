"""Recommend the replica set that is hardest to break twice.

Five candidate operating systems share a pool of vulnerabilities; two of
them are exposed to the same critical CVE. The search ranks every 3-node
configuration by resilience risk (shared vulnerabilities enabling
parallel attacks) and then security risk (total exposure). Run:
python3 demos/05_configuration_search.py
"""
from itsrisk.configurator import NodeProfile, Policy, recommend, shared_vulns

SCORES = {
    "CVE-2024-1001": 3.2,
    "CVE-2024-1002": 5.5,
    "CVE-2024-1003": 4.1,
    "CVE-2024-1004": 2.4,
    "CVE-2024-1005": 6.7,
    "CVE-2024-1100": 9.6,   # the shared critical one
    "CVE-2024-1200": 7.0,
    "CVE-2024-1201": 7.1,   # same flaw as 1200, different id (clustered)
}
CLUSTERS = {"CVE-2024-1200": 0, "CVE-2024-1201": 0}

POOL = [
    NodeProfile("alpine-edge", "alpine", frozenset({"CVE-2024-1001", "CVE-2024-1100"})),
    NodeProfile("debian-stable", "debian", frozenset({"CVE-2024-1002", "CVE-2024-1100"})),
    NodeProfile("freebsd-14", "freebsd", frozenset({"CVE-2024-1003", "CVE-2024-1200"})),
    NodeProfile("openbsd-7", "openbsd", frozenset({"CVE-2024-1004", "CVE-2024-1201"})),
    NodeProfile("fedora-40", "fedora", frozenset({"CVE-2024-1005"})),
]

print("pairwise shared vulnerabilities (direct ids or common cluster):")
for i, a in enumerate(POOL):
    for b in POOL[i + 1:]:
        shared = shared_vulns(a, b, CLUSTERS)
        if shared:
            print(f"  {a.name} + {b.name}: {sorted(shared)}")

for policy in (Policy.RESILIENCE_FIRST, Policy.SECURITY_FIRST):
    ranking = recommend(POOL, 3, policy, SCORES, CLUSTERS)
    print(f"\n{policy.value}: all {len(ranking)} configurations, best first")
    for config in ranking[:4]:
        print(f"  resilience {config.resilience_risk:>6.2f}  "
              f"security {config.security_risk:>6.2f}  {', '.join(config.names)}")
    top = ranking[0]
    print(f"  -> deploy: {', '.join(top.names)}")
