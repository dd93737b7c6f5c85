"""AlienVault OTX pulse retrieval, one indicator query per CVE.

The API offers no batch endpoint, so each CVE costs one request against
the 10,000-per-hour budget; the sliding-window budget paces the queries
instead of a fixed inter-request delay.
"""
from __future__ import annotations

import logging

from ..errors import DataError, NetworkError
from ..records import PulseRef, parse_timestamp
from .ratelimit import RateBudget
from .transport import Clock, Transport

logger = logging.getLogger(__name__)

OTX_API_URL = "https://otx.alienvault.com/api/v1"
BUDGET = (10000, 3600.0)


class OtxSource:
    name = "OTX"

    def __init__(
        self,
        transport: Transport,
        clock: Clock,
        api_key: str | None,
        base_url: str = OTX_API_URL,
    ):
        if not api_key:
            raise DataError("OTX requires an API key (set OTX_API_KEY)")
        self._transport = transport
        self._clock = clock
        self._api_key = api_key
        self._base_url = base_url
        self.budget = RateBudget(*BUDGET, clock=clock)

    def fetch_cve(self, cve_id: str) -> list[PulseRef]:
        """Pulses referencing one CVE; absent indicators mean zero pulses."""
        self.budget.acquire()
        url = f"{self._base_url}/indicators/cve/{cve_id}/general"
        headers = {"X-OTX-API-KEY": self._api_key}
        response = self._transport.get(url, params={}, headers=headers)
        if response.status == 404:
            return []
        if response.status == 429:
            wait = self.budget.window_seconds
            logger.warning("OTX throttled; sleeping %.0fs until the window resets", wait)
            self._clock.sleep(wait)
            response = self._transport.get(url, params={}, headers=headers)
        if response.status != 200:
            raise NetworkError(f"OTX returned HTTP {response.status} for {cve_id}")
        payload = response.json()
        pulses = []
        for pulse in payload.get("pulse_info", {}).get("pulses", []):
            cve_ids = [cve_id]
            created = pulse.get("created")
            pulses.append(
                PulseRef(
                    pulse_id=str(pulse["id"]),
                    cve_ids=cve_ids,
                    created=parse_timestamp(created) if created else None,
                    tags=list(pulse.get("tags", [])),
                )
            )
        return pulses

    def fetch(self, cve_ids: list[str]) -> list[PulseRef]:
        batch: list[PulseRef] = []
        for cve_id in cve_ids:
            batch.extend(self.fetch_cve(cve_id))
        return batch

    def run(self, store, cursor) -> tuple[int, object]:
        cve_ids = sorted(record.cve_id for record in store.all_records())
        pulses = self.fetch(cve_ids)
        store.link_pulses(pulses)
        return len(pulses), cursor
