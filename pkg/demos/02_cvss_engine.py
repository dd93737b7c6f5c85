"""Score CVSS v3.1 vectors locally, exactly like the reference calculator.

Run:  python3 demos/02_cvss_engine.py
"""
from itsrisk import MetricVector, cvss, scoring

VECTORS = [
    ("wormable network RCE", "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"),
    ("scope-changing supply chain bug", "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:C/C:H/I:H/A:H"),
    ("malicious-document code execution", "CVSS:3.1/AV:L/AC:L/PR:N/UI:R/S:U/C:H/I:H/A:H"),
    ("classic reflected XSS", "CVSS:3.1/AV:N/AC:L/PR:N/UI:R/S:C/C:L/I:L/A:N"),
    ("local race-condition privesc", "CVSS:3.1/AV:L/AC:H/PR:L/UI:N/S:U/C:H/I:H/A:H"),
    ("no impact at all", "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:N/I:N/A:N"),
]

print(f"{'description':<36} {'score':>5}  band")
for label, vector_string in VECTORS:
    metrics = MetricVector.from_string(vector_string)
    score = cvss.base_score(metrics)
    band = scoring.severity_band(score).value
    print(f"{label:<36} {score:>5.1f}  {band}")
    assert MetricVector.from_string(metrics.to_string()) == metrics  # round-trip

print("\nsubscores for the document-RCE vector:")
metrics = MetricVector.from_string(VECTORS[2][1])
print(f"  impact:         {cvss.impact_subscore(metrics):.4f}")
print(f"  exploitability: {cvss.exploitability_subscore(metrics):.4f}")
print(f"  rounded up:     {cvss.base_score(metrics)}")
