"""Track how the recommended configuration shifts as new CVEs land.

Simulates four monthly intelligence batches; after each injection the
store is re-profiled, every CVE reassessed, and the recommendation
re-run. The emitted series matches the plotting CSV of `itsrisk report`.
Run:  python3 demos/07_monthly_risk_series.py
"""
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from itsrisk import ScoringConfig, configurator
from itsrisk.configurator import Policy
from itsrisk.records import Status, VulnRecord
from itsrisk.store import VulnStore

NOW = datetime(2024, 6, 1, tzinfo=timezone.utc)


def record(cve_id, oses, base, epss=0.0, patched=False):
    return VulnRecord(
        cve_id=cve_id,
        description=f"synthetic flaw {cve_id}",
        published_date=NOW,
        last_modified=NOW,
        status=Status.ANALYZED,
        cvss_v3_score=base,
        epss=epss,
        patched=patched,
        affected_cpes=[f"cpe:2.3:o:{o}:{o}_os:1.0" for o in oses],
    )


SPECS = [(name, f"{name}:{name}_os") for name in ("alphaos", "betaos", "gammaos", "deltaos")]

BATCHES = [
    ("2024-01", [
        record("CVE-2024-0001", ["alphaos"], 4.0),
        record("CVE-2024-0002", ["betaos"], 5.0),
        record("CVE-2024-0003", ["gammaos"], 3.0),
        record("CVE-2024-0004", ["deltaos"], 6.0),
    ]),
    ("2024-02", [record("CVE-2024-0100", ["alphaos", "betaos"], 9.0, epss=0.8)]),
    ("2024-03", []),
    ("2024-04", [
        record("CVE-2024-0200", ["gammaos"], 9.5, epss=0.9),
        record("CVE-2024-0201", ["gammaos"], 8.0),
    ]),
]

store = VulnStore(Path(tempfile.mkdtemp(prefix="itsrisk-series-")) / "store")
series = configurator.evaluation_series(
    store, SPECS, 2, Policy.RESILIENCE_FIRST, BATCHES, ScoringConfig(now=NOW)
)

print(f"{'period':<9} {'new':>4} {'security':>9} {'resilience':>11}  recommended pair")
for row in series:
    print(f"{row.period:<9} {row.injected:>4} {row.security:>9.3f} "
          f"{row.resilience:>11.3f}  {', '.join(row.recommended)}")

print("\nplot-ready CSV (what `itsrisk report` writes):")
print("period,security,resilience")
for row in series:
    print(f"{row.period},{row.security:.4f},{row.resilience:.4f}")
