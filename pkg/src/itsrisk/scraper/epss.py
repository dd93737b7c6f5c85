"""EPSS daily feed: CVE -> probability of exploitation in the next 30 days."""
from __future__ import annotations

import gzip
import logging
from pathlib import Path

from ..errors import DataError, NetworkError
from ..records import CVE_ID_RE
from .transport import Transport

logger = logging.getLogger(__name__)

EPSS_FEED_URL = "https://epss.cyentia.com/epss_scores-current.csv.gz"


def parse_epss_csv(text: str) -> dict[str, float]:
    """Parse feed rows `cve,epss,percentile`; bad rows are logged and dropped."""
    scores: dict[str, float] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if parts[0] == "cve":
            continue  # header row
        if len(parts) < 2 or not CVE_ID_RE.match(parts[0]):
            logger.warning("epss feed line %d rejected: %r", lineno, line)
            continue
        try:
            probability = float(parts[1])
        except ValueError:
            logger.warning("epss feed line %d rejected: %r", lineno, line)
            continue
        if not 0.0 <= probability <= 1.0:
            logger.warning(
                "epss feed line %d rejected: probability %s outside [0,1]",
                lineno, parts[1],
            )
            continue
        scores[parts[0]] = probability
    return scores


class EpssSource:
    name = "EPSS"

    def __init__(
        self,
        transport: Transport | None = None,
        feed_path: str | Path | None = None,
        feed_url: str = EPSS_FEED_URL,
    ):
        self._transport = transport
        self._feed_path = Path(feed_path) if feed_path else None
        self._feed_url = feed_url

    def fetch(self) -> dict[str, float]:
        if self._feed_path is not None:
            if not self._feed_path.exists():
                raise DataError(f"EPSS feed not found at {self._feed_path}")
            raw = self._feed_path.read_bytes()
        elif self._transport is not None:
            response = self._transport.get(self._feed_url, params={})
            if response.status != 200:
                raise NetworkError(f"EPSS feed returned HTTP {response.status}")
            raw = response.body
        else:
            raise DataError("EPSS source needs a feed path or a transport")
        if raw[:2] == b"\x1f\x8b":
            raw = gzip.decompress(raw)
        return parse_epss_csv(raw.decode("utf-8"))

    def run(self, store, cursor) -> tuple[int, object]:
        scores = self.fetch()
        matched = store.apply_epss(scores)
        logger.info("epss: %d scores, %d matched stored CVEs", len(scores), matched)
        return len(scores), cursor
