"""Detect one vulnerability hiding behind three CVE ids.

Three CVE entries affect three different operating systems, but their
descriptions are near-identical: the same flaw, filed three times. Text
clustering gives them one label, so the configuration search can treat
them as a shared vulnerability across those systems. Run:
python3 demos/03_clustering_shared_vulns.py
"""
from itsrisk import clustering, features

CORPUS = [
    # the disguised triple
    ("CVE-2014-0157",
     "Cross-site scripting vulnerability in the dashboard web interface of the cloud "
     "management platform allows remote attackers to inject arbitrary web script or "
     "HTML via the description field of an orchestration template."),
    ("CVE-2015-3988",
     "Cross-site scripting vulnerability in the dashboard web interface of the cloud "
     "management platform allows remote attackers to inject arbitrary web script or "
     "HTML via the metadata description field of an orchestration template."),
    ("CVE-2016-4428",
     "Cross-site scripting vulnerability in the dashboard web interface of the cloud "
     "management platform allows remote attackers to inject arbitrary web script or "
     "HTML via a crafted description field of an orchestration template form."),
    # unrelated noise
    ("CVE-2020-1001", "buffer overflow in a tftp server allows code execution via a crafted packet"),
    ("CVE-2020-1002", "sql injection in the billing portal lets attackers run arbitrary sql commands"),
    ("CVE-2020-1003", "denial of service in the mail transfer agent daemon via an oversized header"),
    ("CVE-2020-1004", "use after free in the kernel scheduler allows privilege escalation"),
    ("CVE-2020-1005", "path traversal in the firmware updater overwrites configuration files"),
    ("CVE-2020-1006", "improper certificate validation enables man in the middle spoofing"),
]

matrix = features.featurize_bow(CORPUS)
print(f"featurized {len(matrix.ids)} descriptions "
      f"into a {matrix.vectors.shape[1]}-term TF-IDF space")

eps = clustering.default_eps(matrix)
print(f"per-corpus neighborhood radius (10th pct pairwise distance): {eps:.3f}")

for name, assignment in [
    ("DBSCAN", clustering.cluster_dbscan(matrix, eps=eps, min_samples=2)),
    ("OPTICS", clustering.cluster_optics(matrix, min_samples=2, xi=0.05)),
]:
    print(f"\n{name} labels:")
    for cve_id, label in sorted(assignment.labels.items()):
        tag = "noise" if label == clustering.NOISE else f"cluster {label}"
        print(f"  {cve_id}: {tag}")
    triple = {assignment.labels[c] for c, _ in CORPUS[:3]}
    assert len(triple) == 1, "the disguised triple should share one label"
    print(f"  -> the three disguised entries share label {triple.pop()}")
