"""ExploitDB ingestion via a local searchsploit-style CSV mirror.

The upstream site blocks scrapers, so the official mirror CSV index is
the data source; refreshing the mirror is an operator task that this
module only checks for.
"""
from __future__ import annotations

import csv
import logging
from pathlib import Path

from ..errors import DataError
from ..records import CVE_ID_RE, ExploitRecord

logger = logging.getLogger(__name__)

EXPLOIT_URL_TEMPLATE = "https://www.exploit-db.com/exploits/{id}"


def parse_mirror_csv(text: str) -> list[ExploitRecord]:
    """Parse the files_exploits.csv index into ExploitRecords."""
    reader = csv.DictReader(text.splitlines())
    records = []
    for row in reader:
        codes = [
            code.strip()
            for code in (row.get("codes") or "").split(";")
            if CVE_ID_RE.match(code.strip())
        ]
        exploit_id = (row.get("id") or "").strip()
        if not exploit_id:
            continue
        records.append(
            ExploitRecord(
                exploit_id=exploit_id,
                title=(row.get("description") or "").strip(),
                url=(row.get("source_url") or "").strip()
                or EXPLOIT_URL_TEMPLATE.format(id=exploit_id),
                local_path=(row.get("file") or "").strip(),
                codes=codes,
                verified=(row.get("verified") or "0").strip() in ("1", "true", "True"),
                file_type=(row.get("type") or "").strip(),
            )
        )
    return records


class ExploitDbSource:
    name = "ExploitDB"

    def __init__(self, mirror_path: str | Path):
        self._mirror_path = Path(mirror_path)

    def fetch(self) -> list[ExploitRecord]:
        if not self._mirror_path.exists():
            raise DataError(
                f"ExploitDB mirror CSV not found at {self._mirror_path}; refresh it "
                "with `searchsploit -u` or download files_exploits.csv from the "
                "exploitdb repository and point the config at it"
            )
        return parse_mirror_csv(self._mirror_path.read_text(encoding="utf-8"))

    def fetch_new(self, known_ids: set[str]) -> list[ExploitRecord]:
        """Incremental variant: only rows not seen in a previous ingest."""
        return [r for r in self.fetch() if r.exploit_id not in known_ids]

    def run(self, store, cursor) -> tuple[int, object]:
        new = self.fetch_new(store.exploit_ids())
        store.link_exploits(new)
        cursor.page_offset = 0
        return len(new), cursor
