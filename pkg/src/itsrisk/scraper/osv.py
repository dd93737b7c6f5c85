"""OSV ingestion: full bulk archive first, modified-since deltas after.

OSV advisories use their own ids; entries with a CVE alias are stored
under that CVE, the rest land in the non-CVE bucket under their native id.
"""
from __future__ import annotations

import json
import logging
import zipfile
from pathlib import Path

from .. import cvss
from ..errors import DataError, NetworkError
from ..records import CVE_ID_RE, MetricVector, Provenance, Status, VulnRecord, parse_timestamp
from .cursors import SourceCursor
from .transport import Clock, Transport

logger = logging.getLogger(__name__)

OSV_API_URL = "https://api.osv.dev/v1"


def _cve_alias(doc: dict) -> str | None:
    candidates = [doc.get("id", "")] + list(doc.get("aliases", []))
    for candidate in candidates:
        if CVE_ID_RE.match(candidate):
            return candidate
    return None


def parse_osv_doc(doc: dict) -> VulnRecord | None:
    """Map an OSV advisory to a VulnRecord; None when no CVE alias exists."""
    cve_id = _cve_alias(doc)
    if cve_id is None:
        return None
    description = doc.get("summary") or doc.get("details") or ""
    published = parse_timestamp(doc.get("published") or doc["modified"])
    modified = parse_timestamp(doc["modified"])
    if published > modified:
        published = modified
    vector = None
    v3_score = None
    for severity in doc.get("severity", []):
        if severity.get("type") in ("CVSS_V3", "CVSS_V3.1") and severity.get("score"):
            vector = MetricVector.from_string(severity["score"])
            v3_score = cvss.base_score(vector)
            break
    cpes = []
    for affected in doc.get("affected", []):
        package = affected.get("package", {})
        name = package.get("name")
        if name:
            ecosystem = package.get("ecosystem", "osv")
            cpes.append(f"cpe:2.3:a:{ecosystem.lower()}:{name.lower()}:*")
    return VulnRecord(
        cve_id=cve_id,
        description=description,
        published_date=published,
        last_modified=modified,
        status=Status.ANALYZED if v3_score is not None else Status.RECEIVED,
        cvss_v3_metrics=vector,
        cvss_v3_score=v3_score,
        affected_cpes=cpes,
        score_provenance=Provenance.NVD_ASSESSED,
    )


class OsvSource:
    name = "OSV"

    def __init__(
        self,
        transport: Transport,
        clock: Clock,
        bulk_archive: str | Path | None = None,
        base_url: str = OSV_API_URL,
    ):
        self._transport = transport
        self._clock = clock
        self._bulk_archive = Path(bulk_archive) if bulk_archive else None
        self._base_url = base_url

    def fetch_bulk(self) -> tuple[list[VulnRecord], list[tuple[str, dict]]]:
        """Read every advisory in the local bulk zip archive.

        Returns (cve_records, non_cve_docs).
        """
        if self._bulk_archive is None or not self._bulk_archive.exists():
            raise DataError(
                f"OSV bulk archive not found at {self._bulk_archive}; download the "
                "ecosystem all.zip from the OSV storage bucket first"
            )
        records: list[VulnRecord] = []
        noncve: list[tuple[str, dict]] = []
        with zipfile.ZipFile(self._bulk_archive) as archive:
            for name in sorted(archive.namelist()):
                if not name.endswith(".json"):
                    continue
                doc = json.loads(archive.read(name).decode("utf-8"))
                record = parse_osv_doc(doc)
                if record is None:
                    noncve.append((doc["id"], doc))
                else:
                    records.append(record)
        return records, noncve

    def fetch_incremental(
        self, watermark: str
    ) -> tuple[list[VulnRecord], list[tuple[str, dict]], str]:
        """Query advisories modified at or after the watermark.

        Pages through {base}/vulns?modified_since=...&page=N; entries older
        than the watermark are dropped client-side as well.
        """
        records: list[VulnRecord] = []
        noncve: list[tuple[str, dict]] = []
        newest = watermark
        page = 0
        while True:
            response = self._transport.get(
                f"{self._base_url}/vulns",
                params={"modified_since": watermark, "page": str(page)},
            )
            if response.status != 200:
                raise NetworkError(f"OSV returned HTTP {response.status}")
            payload = response.json()
            for doc in payload.get("vulns", []):
                modified = doc.get("modified", "")
                if modified and parse_timestamp(modified).isoformat() < watermark:
                    continue
                record = parse_osv_doc(doc)
                if record is None:
                    noncve.append((doc["id"], doc))
                else:
                    records.append(record)
                if modified:
                    stamp = parse_timestamp(modified).isoformat()
                    if stamp > newest:
                        newest = stamp
            if payload.get("next_page") is None:
                break
            page = int(payload["next_page"])
        return records, noncve, newest

    def run(self, store, cursor: SourceCursor) -> tuple[int, SourceCursor]:
        if cursor.watermark is None:
            records, noncve = self.fetch_bulk()
            stamps = [r.last_modified.isoformat() for r in records]
            stamps += [
                parse_timestamp(doc["modified"]).isoformat()
                for _, doc in noncve
                if doc.get("modified")
            ]
            newest = max(stamps, default=self._clock.now().isoformat())
        else:
            records, noncve, newest = self.fetch_incremental(cursor.watermark)
        for native_id, doc in noncve:
            store.upsert_noncve(native_id, doc)
        cursor.watermark = newest
        store.ingest_page(records, self.name, cursor.to_doc())
        return len(records) + len(noncve), cursor
