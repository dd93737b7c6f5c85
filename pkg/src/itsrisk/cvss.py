"""CVSS v3.1 base score equations.

Implements the published base-score formulas including the one-decimal
round-up rule, so locally recomputed scores agree exactly with the
reference calculator.
"""
from __future__ import annotations

import math

from .records import MetricVector

_AV = {"N": 0.85, "A": 0.62, "L": 0.55, "P": 0.2}
_AC = {"L": 0.77, "H": 0.44}
_PR_UNCHANGED = {"N": 0.85, "L": 0.62, "H": 0.27}
_PR_CHANGED = {"N": 0.85, "L": 0.68, "H": 0.50}
_UI = {"N": 0.85, "R": 0.62}
_CIA = {"N": 0.0, "L": 0.22, "H": 0.56}


def roundup(value: float) -> float:
    """Round up to one decimal, with the 1e-5 guard the standard mandates."""
    scaled = int(math.floor(value * 100000 + 0.5))
    if scaled % 10000 == 0:
        return scaled / 100000.0
    return (scaled // 10000 + 1) / 10.0


def impact_subscore(metrics: MetricVector) -> float:
    iss = 1.0 - (
        (1.0 - _CIA[metrics.confidentiality])
        * (1.0 - _CIA[metrics.integrity])
        * (1.0 - _CIA[metrics.availability])
    )
    if metrics.scope == "U":
        return 6.42 * iss
    return 7.52 * (iss - 0.029) - 3.25 * (iss - 0.02) ** 15


def exploitability_subscore(metrics: MetricVector) -> float:
    pr_weights = _PR_CHANGED if metrics.scope == "C" else _PR_UNCHANGED
    return (
        8.22
        * _AV[metrics.attack_vector]
        * _AC[metrics.attack_complexity]
        * pr_weights[metrics.privileges_required]
        * _UI[metrics.user_interaction]
    )


def base_score(metrics: MetricVector) -> float:
    """CVSS v3.1 base score in [0, 10]; 0.0 exactly when impact is zero."""
    impact = impact_subscore(metrics)
    if impact <= 0:
        return 0.0
    raw = impact + exploitability_subscore(metrics)
    if metrics.scope == "C":
        raw = 1.08 * raw
    return roundup(min(raw, 10.0))
