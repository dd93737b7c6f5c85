"""Walk one real-world-shaped CVE through the score reassessment pipeline.

The record starts at CVSS 7.8 (High). Age and an available patch pull the
naive adjustment down to 3.66 (Low), but a 98% exploit probability and
heavy threat-intel attention push the final risk to 8.94, borderline
Critical. Run:  python3 demos/01_score_reassessment.py
"""
from datetime import datetime, timezone

from itsrisk import MetricVector, ScoringConfig, Status, VulnRecord, scoring

record = VulnRecord(
    cve_id="CVE-2017-11882",
    description=(
        "Memory corruption in the equation editor component of an office "
        "suite allows remote attackers to run arbitrary code via a crafted "
        "document."
    ),
    published_date=datetime(2017, 11, 15, tzinfo=timezone.utc),
    last_modified=datetime(2024, 1, 1, tzinfo=timezone.utc),
    status=Status.ANALYZED,
    cvss_v3_metrics=MetricVector.from_string("CVSS:3.1/AV:L/AC:L/PR:N/UI:R/S:U/C:H/I:H/A:H"),
    cvss_v3_score=7.8,
    patched=True,
    exploited=True,
    epss=0.9799,
    pulse_count=0,
)

cfg = ScoringConfig(now=datetime(2024, 6, 1, tzinfo=timezone.utc))

print(f"{record.cve_id}: base score {record.cvss_v3_score} "
      f"({scoring.severity_band(record.cvss_v3_score).value})")

adjusted, unpatched = scoring.adjusted_score(record, cfg)
print(f"\nage/exploit/patch adjustment: {adjusted:.4f} "
      f"({scoring.severity_band(adjusted).value})")
print(f"  the same without the patch factor: {unpatched:.4f}")
print("  a patched seven-year-old bug looks harmless on paper...")

plain = scoring.reassess(record, cfg)
print(f"\nEPSS-weighted mix (exploit probability {record.epss:.2%}): "
      f"{plain.final:.4f} ({scoring.severity_band(plain.final).value})")
print("  ...but patches are not always installed, and this one is actively targeted.")

record.pulse_count = 50
breakdown = scoring.reassess(record, cfg)
print(f"\nwith {record.pulse_count} threat-intel pulses referencing it: "
      f"{breakdown.final:.4f} ({scoring.severity_band(breakdown.final).value})")

print("\nfull factor trace:")
for key, value in breakdown.to_json_dict().items():
    print(f"  {key:>20}: {value}")
