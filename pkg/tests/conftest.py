"""Shared fixtures and synthetic-data builders for the test suite."""
from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import pytest

from itsrisk.records import MetricVector, Provenance, Status, VulnRecord
from itsrisk.scoring import ScoringConfig
from itsrisk.store import VulnStore

ASSESS_TIME = datetime(2024, 6, 1, tzinfo=timezone.utc)


@pytest.fixture(autouse=True, scope="session")
def _no_network():
    """The whole suite runs offline; any socket lookup is a bug."""
    import socket

    def refuse(*args, **kwargs):
        raise AssertionError("network access attempted during the test suite")

    original = (socket.getaddrinfo, socket.create_connection)
    socket.getaddrinfo = refuse
    socket.create_connection = refuse
    yield
    socket.getaddrinfo, socket.create_connection = original


def make_record(
    cve_id: str,
    description: str = "synthetic vulnerability description",
    base: float | None = 5.0,
    vector: str | None = None,
    published: datetime | None = None,
    modified: datetime | None = None,
    patched: bool = False,
    exploited: bool = False,
    epss: float = 0.0,
    pulse_count: int = 0,
    cpes: list[str] | None = None,
    cluster_label: int | None = None,
    provenance: Provenance = Provenance.NVD_ASSESSED,
) -> VulnRecord:
    published = published or datetime(2020, 1, 1, tzinfo=timezone.utc)
    modified = modified or published
    return VulnRecord(
        cve_id=cve_id,
        description=description,
        published_date=published,
        last_modified=modified,
        status=Status.ANALYZED if base is not None else Status.RECEIVED,
        cvss_v3_metrics=MetricVector.from_string(vector) if vector else None,
        cvss_v3_score=base,
        patched=patched,
        exploited=exploited,
        epss=epss,
        pulse_count=pulse_count,
        affected_cpes=cpes or [],
        cluster_label=cluster_label,
        score_provenance=provenance,
    )


def worked_example(pulse_count: int = 0) -> VulnRecord:
    """The old, exploited, patched office-equation-editor CVE with its
    published base score 7.8 and EPSS 0.9799."""
    return make_record(
        "CVE-2017-11882",
        description=(
            "Memory corruption in the equation editor component of an office "
            "suite allows remote attackers to run arbitrary code via a "
            "crafted document."
        ),
        base=7.8,
        vector="CVSS:3.1/AV:L/AC:L/PR:N/UI:R/S:U/C:H/I:H/A:H",
        published=datetime(2017, 11, 15, tzinfo=timezone.utc),
        modified=datetime(2024, 1, 1, tzinfo=timezone.utc),
        patched=True,
        exploited=True,
        epss=0.9799,
        pulse_count=pulse_count,
    )


@pytest.fixture
def scoring_cfg() -> ScoringConfig:
    return ScoringConfig(now=ASSESS_TIME, oldness_threshold_days=365.0)


@pytest.fixture
def store(tmp_path) -> VulnStore:
    with VulnStore(tmp_path / "store") as s:
        yield s


def random_metric_vector(rng: random.Random) -> MetricVector:
    return MetricVector(
        attack_vector=rng.choice("NALP"),
        attack_complexity=rng.choice("LH"),
        privileges_required=rng.choice("NLH"),
        user_interaction=rng.choice("NR"),
        scope=rng.choice("UC"),
        confidentiality=rng.choice("NLH"),
        integrity=rng.choice("NLH"),
        availability=rng.choice("NLH"),
    )


# -- synthetic description corpus ------------------------------------------------

_FAMILIES = [
    ("buffer overflow in {p} allows remote attackers to execute arbitrary code via {v}", 9.8),
    ("cross-site scripting vulnerability in {p} allows remote attackers to inject arbitrary web script via {v}", 6.1),
    ("sql injection in {p} allows remote attackers to execute arbitrary sql commands via {v}", 8.8),
    ("information disclosure in {p} allows local users to read sensitive files via {v}", 5.5),
    ("denial of service in {p} allows remote attackers to crash the daemon via {v}", 7.5),
    ("use after free in {p} kernel module allows privilege escalation via {v}", 7.8),
    ("path traversal in {p} allows remote attackers to overwrite configuration files via {v}", 6.5),
    ("improper certificate validation in {p} allows man in the middle attackers to spoof servers via {v}", 4.8),
]

_PRODUCTS = [
    "openssl", "the apache http server", "the linux kernel", "postgresql",
    "the samba file server", "libxml2", "the gnome display manager", "curl",
    "the exim mail transfer agent", "busybox", "the xen hypervisor", "qemu",
]

_VECTORS = [
    "a crafted packet", "a long query string", "a malformed certificate",
    "a truncated archive", "unvalidated form input", "a symlink race",
    "an oversized header", "a negative length field",
]


def synth_description(rng: random.Random) -> tuple[str, float]:
    template, score = _FAMILIES[rng.randrange(len(_FAMILIES))]
    text = template.format(
        p=rng.choice(_PRODUCTS), v=rng.choice(_VECTORS)
    )
    return text, score


def synth_dataset(n_rows: int, seed: int = 7, noise: bool = True) -> list[tuple[str, str, float]]:
    """(cve_id, description, score) rows with a learnable family -> score map."""
    rng = random.Random(seed)
    rows = []
    for index in range(n_rows):
        text, score = synth_description(rng)
        if noise:
            score = round(score + rng.choice([-0.2, -0.1, 0.0, 0.0, 0.1, 0.2]), 1)
        rows.append((f"CVE-2023-{10000 + index}", text, min(10.0, max(0.1, score))))
    return rows


def synth_store_records(
    n: int, seed: int = 3, os_names: list[str] | None = None
) -> list[VulnRecord]:
    """Records spread over synthetic OS CPEs for profile/configurator tests."""
    rng = random.Random(seed)
    os_names = os_names or ["alphaos", "betaos", "gammaos", "deltaos"]
    records = []
    for index in range(n):
        text, score = synth_description(rng)
        n_os = rng.randint(1, 3)
        targets = rng.sample(os_names, n_os)
        cpes = [f"cpe:2.3:o:{name}:{name}_os:{rng.randint(1, 3)}.0" for name in targets]
        records.append(
            make_record(
                f"CVE-2022-{20000 + index}",
                description=text,
                base=round(min(10.0, max(0.1, score + rng.uniform(-1, 1))), 1),
                published=datetime(2022, 1, 1, tzinfo=timezone.utc)
                + timedelta(days=rng.randint(0, 600)),
                modified=datetime(2024, 1, 1, tzinfo=timezone.utc),
                patched=rng.random() < 0.5,
                exploited=rng.random() < 0.3,
                epss=round(rng.random() ** 3, 4),
                pulse_count=rng.randrange(0, 40),
                cpes=cpes,
            )
        )
    return records
