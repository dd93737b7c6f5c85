"""NVD CVE API client: paged JSON, keyed/keyless budgets, delta windows."""
from __future__ import annotations

import json
import logging
from typing import Callable, Iterator

from ..errors import NetworkError
from ..records import MetricVector, Provenance, Status, VulnRecord, parse_timestamp
from .cursors import SourceCursor
from .ratelimit import RateBudget
from .transport import Clock, Transport, TransportResponse

logger = logging.getLogger(__name__)

NVD_API_URL = "https://services.nvd.nist.gov/rest/json/cves/2.0"
PAGE_SIZE = 2000
KEYED_BUDGET = (50, 30.0)
KEYLESS_BUDGET = (5, 30.0)
MAX_RETRIES = 5


def parse_nvd_item(item: dict) -> VulnRecord:
    """Map one NVD 2.0 vulnerability object onto a VulnRecord."""
    cve = item["cve"]
    description = next(
        (d["value"] for d in cve.get("descriptions", []) if d.get("lang") == "en"),
        "",
    )
    metrics = cve.get("metrics", {})
    vector = None
    v3_score = None
    for key in ("cvssMetricV31", "cvssMetricV30"):
        entries = metrics.get(key)
        if entries:
            data = entries[0].get("cvssData", {})
            v3_score = data.get("baseScore")
            if data.get("vectorString"):
                vector = MetricVector.from_string(data["vectorString"])
            break
    v2_entries = metrics.get("cvssMetricV2") or []
    v2_score = v2_entries[0].get("cvssData", {}).get("baseScore") if v2_entries else None
    patched = any(
        "Patch" in (ref.get("tags") or []) for ref in cve.get("references", [])
    )
    cpes = [
        match["criteria"]
        for config in cve.get("configurations", [])
        for node in config.get("nodes", [])
        for match in node.get("cpeMatch", [])
        if match.get("criteria")
    ]
    # NVD analysis without v3 metrics (old, v2-only CVEs) keeps Received so
    # that score presence stays consistent with the record contract; the
    # scoring engine still uses the v2 base directly.
    status = Status.ANALYZED if v3_score is not None else Status.RECEIVED
    return VulnRecord(
        cve_id=cve["id"],
        description=description,
        published_date=parse_timestamp(cve["published"]),
        last_modified=parse_timestamp(cve["lastModified"]),
        status=status,
        cvss_v3_metrics=vector,
        cvss_v3_score=v3_score,
        cvss_v2_score=v2_score,
        patched=patched,
        affected_cpes=cpes,
        score_provenance=Provenance.NVD_ASSESSED,
    )


class NvdSource:
    """Paged fetcher over the NVD CVE API."""

    name = "NVD"

    def __init__(
        self,
        transport: Transport,
        clock: Clock,
        api_key: str | None = None,
        quarantine: Callable[[bytes], None] | None = None,
        base_url: str = NVD_API_URL,
    ):
        self._transport = transport
        self._clock = clock
        self._api_key = api_key
        self._quarantine = quarantine
        self._base_url = base_url
        capacity, window = KEYED_BUDGET if api_key else KEYLESS_BUDGET
        self.budget = RateBudget(capacity, window, clock)

    def _request(self, params: dict[str, str]) -> TransportResponse:
        headers = {"apiKey": self._api_key} if self._api_key else {}
        backoff = 1.0
        for attempt in range(MAX_RETRIES):
            self.budget.acquire()
            response = self._transport.get(self._base_url, params=params, headers=headers)
            if response.status in (403, 429):
                logger.warning(
                    "NVD throttled (HTTP %d), backing off %.0fs", response.status, backoff
                )
                self._clock.sleep(backoff)
                backoff *= 2
                continue
            if response.status != 200:
                raise NetworkError(f"NVD returned HTTP {response.status}")
            return response
        raise NetworkError(f"NVD still throttling after {MAX_RETRIES} attempts")

    def pages(self, cursor: SourceCursor) -> Iterator[tuple[list[VulnRecord], SourceCursor]]:
        """Yield (records, cursor-after-this-page) until the source is drained.

        The caller commits each page together with its cursor, so a crash
        resumes from the first uncommitted page.
        """
        offset = cursor.page_offset
        watermark = cursor.watermark
        window_end = self._clock.now().isoformat() if watermark else None
        newest = watermark
        while True:
            params = {
                "startIndex": str(offset),
                "resultsPerPage": str(PAGE_SIZE),
            }
            if watermark:
                params["lastModStartDate"] = watermark
                params["lastModEndDate"] = window_end
            response = self._request(params)
            try:
                payload = response.json()
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                logger.error("NVD page at offset %d is malformed: %s", offset, exc)
                if self._quarantine:
                    self._quarantine(response.body)
                offset += PAGE_SIZE
                continue
            items = payload.get("vulnerabilities", [])
            total = int(payload.get("totalResults", 0))
            records = [parse_nvd_item(item) for item in items]
            for record in records:
                modified = record.last_modified.isoformat()
                if newest is None or modified > newest:
                    newest = modified
            offset += len(items)
            done = offset >= total or not items
            final_mark = newest
            if done and window_end and (final_mark is None or final_mark < window_end):
                final_mark = window_end  # empty/short delta still advances
            next_cursor = SourceCursor(
                source=cursor.source,
                watermark=final_mark if done else watermark,
                page_offset=0 if done else offset,
                last_run=self._clock.now().isoformat(),
                consecutive_failures=0,
            )
            yield records, next_cursor
            if done:
                return

    def fetch(self, cursor: SourceCursor) -> tuple[list[VulnRecord], SourceCursor]:
        """Drain all pages; convenience wrapper over pages()."""
        batch: list[VulnRecord] = []
        final = cursor
        for records, final in self.pages(cursor):
            batch.extend(records)
        return batch, final

    def run(self, store, cursor: SourceCursor) -> tuple[int, SourceCursor]:
        """Ingest incrementally, committing each page atomically."""
        count = 0
        final = cursor
        for records, final in self.pages(cursor):
            count += store.ingest_page(records, self.name, final.to_doc())
        return count, final
