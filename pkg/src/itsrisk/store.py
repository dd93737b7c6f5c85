"""Embedded document store for scraped vulnerability intelligence.

Layout of a store directory:

    <store_dir>/
        schema-version    text file, currently "1"
        records.db        SQLite database

The database keeps one JSON document per row:

    records       cve_id      -> VulnRecord document
    noncve        native_id   -> raw advisory without a CVE alias
    exploits      exploit_id  -> ExploitRecord document
    pulses        pulse_id    -> PulseRef document
    pending_epss  cve_id      -> probability seen before the CVE itself
    cursors       source      -> scraper sync state

Writes are serialized through one lock (single writer, many readers);
reads materialize inside a single statement so callers see a snapshot.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import sqlite3
import threading
from pathlib import Path
from typing import Iterable

from .configurator import NodeProfile
from .errors import DataError, ValidationError
from .records import (
    ExploitRecord,
    MetricVector,
    Provenance,
    PulseRef,
    Status,
    VulnRecord,
    parse_timestamp,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"

DATASET_COLUMNS = [
    "cve_id",
    "description",
    "cvss_vector",
    "cvss_v3_score",
    "published_date",
    "patched",
    "exploited",
    "epss",
    "pulse_count",
]

_TABLES = ("records", "noncve", "exploits", "pulses", "pending_epss", "cursors")


def _merge(existing: VulnRecord, incoming: VulnRecord) -> VulnRecord:
    """Merge two versions of the same CVE.

    The version with the newer last_modified supplies the source fields;
    enrichment gathered locally (exploit/patch flags, EPSS, pulse counts,
    cluster labels) is never lost, and an official score never reverts to
    a predicted one.
    """
    newer, older = (incoming, existing)
    if existing.last_modified > incoming.last_modified:
        newer, older = (existing, incoming)
    doc = newer.to_doc()
    doc["exploited"] = existing.exploited or incoming.exploited
    doc["patched"] = existing.patched or incoming.patched
    doc["epss"] = newer.epss if newer.epss > 0 else older.epss
    doc["pulse_count"] = max(existing.pulse_count, incoming.pulse_count)
    if doc["cluster_label"] is None:
        doc["cluster_label"] = older.cluster_label
    if not doc["affected_cpes"]:
        doc["affected_cpes"] = list(older.affected_cpes)
    if (
        newer.score_provenance is Provenance.PREDICTED
        and older.score_provenance is Provenance.NVD_ASSESSED
        and older.cvss_v3_score is not None
    ):
        doc["score_provenance"] = Provenance.NVD_ASSESSED.value
        doc["status"] = older.status.value
        doc["cvss_v3_score"] = older.cvss_v3_score
        doc["cvss_v3_metrics"] = (
            older.cvss_v3_metrics.to_string() if older.cvss_v3_metrics else None
        )
    return VulnRecord.from_doc(doc)


def cpe_fields(cpe: str) -> str:
    """Extract the lowercased vendor:product:version key from a CPE string.

    Accepts full cpe:2.3 URIs, legacy cpe:/ URIs, or a bare
    vendor:product:version triple.
    """
    value = cpe.strip().lower()
    if value.startswith("cpe:2.3:"):
        parts = value.split(":")[3:6]
    elif value.startswith("cpe:/"):
        parts = value[5:].split(":")[1:4]
    else:
        parts = value.split(":")[:3]
    while len(parts) < 3:
        parts.append("")
    return ":".join(parts[:3])


def cpe_matches(cpe: str, pattern: str) -> bool:
    """Case-insensitive prefix match on the vendor:product:version key."""
    return cpe_fields(cpe).startswith(pattern.strip().lower())


class VulnStore:
    """Document store for vulnerability records and their intelligence."""

    def __init__(self, store_dir: str | Path):
        self.store_dir = Path(store_dir)
        self.store_dir.mkdir(parents=True, exist_ok=True)
        version_file = self.store_dir / "schema-version"
        if version_file.exists():
            found = version_file.read_text().strip()
            if found != SCHEMA_VERSION:
                raise DataError(
                    f"store schema version {found!r} != supported {SCHEMA_VERSION!r}"
                )
        else:
            version_file.write_text(SCHEMA_VERSION + "\n")
        self._conn = sqlite3.connect(
            self.store_dir / "records.db", check_same_thread=False
        )
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._write_lock = threading.Lock()
        with self._conn:
            for table in _TABLES:
                self._conn.execute(
                    f"CREATE TABLE IF NOT EXISTS {table} (key TEXT PRIMARY KEY, doc TEXT NOT NULL)"
                )

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "VulnStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- vulnerability records ------------------------------------------------

    def upsert_record(self, record: VulnRecord) -> VulnRecord:
        """Insert or merge one record; returns what is now stored."""
        with self._write_lock, self._conn:
            merged = self._upsert_locked(record)
        return merged

    def upsert_many(self, records: Iterable[VulnRecord]) -> int:
        """Upsert a batch atomically; returns the number processed."""
        count = 0
        with self._write_lock, self._conn:
            for record in records:
                self._upsert_locked(record)
                count += 1
        return count

    def _upsert_locked(self, record: VulnRecord) -> VulnRecord:
        existing = self._get(record.cve_id)
        merged = _merge(existing, record) if existing else record
        pending = self._conn.execute(
            "SELECT doc FROM pending_epss WHERE key = ?", (record.cve_id,)
        ).fetchone()
        if pending and merged.epss == 0.0:
            doc = merged.to_doc()
            doc["epss"] = float(pending[0])
            merged = VulnRecord.from_doc(doc)
        if pending:
            self._conn.execute(
                "DELETE FROM pending_epss WHERE key = ?", (record.cve_id,)
            )
        self._put("records", merged.cve_id, json.dumps(merged.to_doc()))
        return merged

    def _put(self, table: str, key: str, doc: str) -> None:
        self._conn.execute(
            f"INSERT INTO {table} (key, doc) VALUES (?, ?) "
            "ON CONFLICT(key) DO UPDATE SET doc = excluded.doc",
            (key, doc),
        )

    def _get(self, cve_id: str) -> VulnRecord | None:
        row = self._conn.execute(
            "SELECT doc FROM records WHERE key = ?", (cve_id,)
        ).fetchone()
        return VulnRecord.from_doc(json.loads(row[0])) if row else None

    def get(self, cve_id: str) -> VulnRecord | None:
        return self._get(cve_id)

    def require(self, cve_id: str) -> VulnRecord:
        record = self._get(cve_id)
        if record is None:
            raise DataError(f"unknown CVE id: {cve_id}")
        return record

    def all_records(self) -> list[VulnRecord]:
        rows = self._conn.execute("SELECT doc FROM records ORDER BY key").fetchall()
        return [VulnRecord.from_doc(json.loads(doc)) for (doc,) in rows]

    def count(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM records").fetchone()[0]

    def update_fields(self, cve_id: str, **fields) -> VulnRecord:
        """Set individual fields on a stored record, revalidating the result."""
        with self._write_lock, self._conn:
            record = self.require(cve_id)
            doc = record.to_doc()
            doc.update(fields)
            updated = VulnRecord.from_doc(doc)
            self._put("records", cve_id, json.dumps(updated.to_doc()))
        return updated

    # -- non-CVE advisories ---------------------------------------------------

    def upsert_noncve(self, native_id: str, doc: dict) -> None:
        """Keep advisories without a CVE alias under their native id."""
        payload = dict(doc)
        payload["non_cve"] = True
        with self._write_lock, self._conn:
            self._put("noncve", native_id, json.dumps(payload))

    def noncve_count(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM noncve").fetchone()[0]

    # -- exploits and pulses --------------------------------------------------

    def link_exploits(self, exploits: Iterable[ExploitRecord]) -> int:
        """Store exploits and flag the CVEs they reference.

        Returns how many distinct stored CVEs are now marked exploited by
        this batch; references to CVEs not in the store stay pending and
        are resolved by a later relink_all().
        """
        flagged: set[str] = set()
        with self._write_lock, self._conn:
            for exploit in exploits:
                self._put("exploits", exploit.exploit_id, json.dumps(exploit.to_doc()))
                for cve_id in exploit.codes:
                    record = self._get(cve_id)
                    if record is None:
                        continue
                    if cve_id not in flagged:
                        flagged.add(cve_id)
                    if not record.exploited:
                        doc = record.to_doc()
                        doc["exploited"] = True
                        self._put("records", cve_id, json.dumps(doc))
        return len(flagged)

    def link_pulses(self, pulses: Iterable[PulseRef]) -> dict[str, int]:
        """Store pulses and recount distinct pulse references per CVE.

        A pulse seen again (e.g. via queries for different CVEs) merges its
        CVE list with the stored one instead of replacing it.
        """
        touched: set[str] = set()
        with self._write_lock, self._conn:
            for pulse in pulses:
                row = self._conn.execute(
                    "SELECT doc FROM pulses WHERE key = ?", (pulse.pulse_id,)
                ).fetchone()
                doc = pulse.to_doc()
                if row:
                    stored = json.loads(row[0])
                    doc["cve_ids"] = sorted(set(stored["cve_ids"]) | set(doc["cve_ids"]))
                    doc["tags"] = sorted(set(stored.get("tags", [])) | set(doc["tags"]))
                self._put("pulses", pulse.pulse_id, json.dumps(doc))
                touched.update(doc["cve_ids"])
            counts = self._pulse_counts_locked()
            result: dict[str, int] = {}
            for cve_id in sorted(touched):
                count = counts.get(cve_id, 0)
                result[cve_id] = count
                record = self._get(cve_id)
                if record is not None and record.pulse_count != count:
                    doc = record.to_doc()
                    doc["pulse_count"] = count
                    self._put("records", cve_id, json.dumps(doc))
        return result

    def _pulse_counts_locked(self) -> dict[str, int]:
        counts: dict[str, set[str]] = {}
        for (doc,) in self._conn.execute("SELECT doc FROM pulses").fetchall():
            pulse = json.loads(doc)
            for cve_id in pulse.get("cve_ids", []):
                counts.setdefault(cve_id, set()).add(pulse["pulse_id"])
        return {cve: len(ids) for cve, ids in counts.items()}

    def all_exploits(self) -> list[ExploitRecord]:
        rows = self._conn.execute("SELECT doc FROM exploits ORDER BY key").fetchall()
        return [ExploitRecord.from_doc(json.loads(doc)) for (doc,) in rows]

    def all_pulses(self) -> list[PulseRef]:
        rows = self._conn.execute("SELECT doc FROM pulses ORDER BY key").fetchall()
        return [PulseRef.from_doc(json.loads(doc)) for (doc,) in rows]

    def exploit_ids(self) -> set[str]:
        rows = self._conn.execute("SELECT key FROM exploits").fetchall()
        return {key for (key,) in rows}

    def relink_all(self) -> None:
        """Re-resolve exploit/pulse links; scrapers call this each cycle."""
        self.link_exploits(self.all_exploits())
        self.link_pulses(self.all_pulses())

    # -- EPSS -----------------------------------------------------------------

    def apply_epss(self, probabilities: dict[str, float]) -> int:
        """Update EPSS on matching records; unknown CVEs are kept pending."""
        matched = 0
        with self._write_lock, self._conn:
            for cve_id, epss in probabilities.items():
                if not 0.0 <= epss <= 1.0:
                    raise ValidationError(f"epss {epss} for {cve_id} outside [0,1]")
                record = self._get(cve_id)
                if record is None:
                    self._put("pending_epss", cve_id, repr(float(epss)))
                    continue
                matched += 1
                if record.epss != epss:
                    doc = record.to_doc()
                    doc["epss"] = epss
                    self._put("records", cve_id, json.dumps(doc))
        return matched

    def pending_epss_count(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM pending_epss").fetchone()[0]

    # -- cursors --------------------------------------------------------------

    def load_cursor(self, source: str) -> dict | None:
        row = self._conn.execute(
            "SELECT doc FROM cursors WHERE key = ?", (source,)
        ).fetchone()
        return json.loads(row[0]) if row else None

    def save_cursor(self, source: str, doc: dict) -> None:
        with self._write_lock, self._conn:
            self._put("cursors", source, json.dumps(doc))

    def ingest_page(
        self, records: Iterable[VulnRecord], source: str, cursor_doc: dict
    ) -> int:
        """Atomically upsert one page of records and advance its cursor.

        A crash between pages therefore never loses the page already
        committed nor records a cursor ahead of the data.
        """
        count = 0
        with self._write_lock, self._conn:
            for record in records:
                self._upsert_locked(record)
                count += 1
            self._put("cursors", source, json.dumps(cursor_doc))
        return count

    # -- dataset import/export ------------------------------------------------

    def export_dataset(self, status: Status | None = None) -> str:
        """Render records as the dataset CSV (RFC 4180, fixed column set)."""
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(DATASET_COLUMNS)
        for record in self.all_records():
            if status is not None and record.status is not status:
                continue
            writer.writerow(
                [
                    record.cve_id,
                    record.description,
                    record.cvss_v3_metrics.to_string() if record.cvss_v3_metrics else "",
                    "" if record.cvss_v3_score is None else repr(record.cvss_v3_score),
                    record.published_date.isoformat(),
                    "true" if record.patched else "false",
                    "true" if record.exploited else "false",
                    repr(record.epss),
                    str(record.pulse_count),
                ]
            )
        return out.getvalue()

    def import_dataset(self, csv_text: str) -> int:
        """Load records from dataset CSV text produced by export_dataset."""
        reader = csv.reader(io.StringIO(csv_text))
        header = next(reader, None)
        if header != DATASET_COLUMNS:
            raise DataError(f"unexpected dataset columns: {header}")
        count = 0
        for row in reader:
            if not row:
                continue
            (cve_id, description, vector, v3_score, published, patched, exploited,
             epss, pulse_count) = row
            published_date = parse_timestamp(published)
            has_score = v3_score != ""
            record = VulnRecord(
                cve_id=cve_id,
                description=description,
                published_date=published_date,
                last_modified=published_date,
                status=Status.ANALYZED if has_score else Status.RECEIVED,
                cvss_v3_metrics=MetricVector.from_string(vector) if vector else None,
                cvss_v3_score=float(v3_score) if has_score else None,
                patched=patched == "true",
                exploited=exploited == "true",
                epss=float(epss),
                pulse_count=int(pulse_count),
            )
            self.upsert_record(record)
            count += 1
        return count

    def export_jsonl(self) -> str:
        """Full-fidelity export, one record document per line."""
        lines = [json.dumps(r.to_doc(), sort_keys=True) for r in self.all_records()]
        return "\n".join(lines) + ("\n" if lines else "")

    def import_jsonl(self, source: str | Path) -> int:
        """Import records from a JSONL fixture.

        A Path is read from disk; a plain string is parsed as the JSONL
        text itself, one document per line.
        """
        text = source.read_text(encoding="utf-8") if isinstance(source, Path) else source
        count = 0
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = VulnRecord.from_doc(json.loads(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValidationError) as exc:
                raise DataError(f"bad JSONL record at line {lineno}: {exc}") from exc
            self.upsert_record(record)
            count += 1
        return count

    # -- node profiles ----------------------------------------------------------

    def build_os_profiles(
        self, os_specs: Iterable[tuple[str, str]]
    ) -> list[NodeProfile]:
        """Resolve each (name, cpe_pattern) spec against the stored CPE lists."""
        records = self.all_records()
        profiles = []
        for name, pattern in os_specs:
            matched = {
                record.cve_id
                for record in records
                if any(cpe_matches(cpe, pattern) for cpe in record.affected_cpes)
            }
            if not matched:
                logger.warning("profile %s: pattern %r matched no CVEs", name, pattern)
            profiles.append(NodeProfile(name=name, cpe_pattern=pattern, cve_ids=frozenset(matched)))
        return profiles
