"""HTTP transport abstraction with record/replay support.

Every scraper talks to a Transport; live runs use requests, tests and
fixture mode use ReplayTransport over recorded payloads, so switching is
configuration rather than a code change.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Protocol

from ..errors import NetworkError


@dataclass
class TransportResponse:
    status: int
    body: bytes = b""
    headers: dict[str, str] = field(default_factory=dict)

    def json(self):
        return json.loads(self.body.decode("utf-8"))

    @property
    def text(self) -> str:
        return self.body.decode("utf-8")


class Transport(Protocol):
    def get(
        self,
        url: str,
        params: dict[str, str] | None = None,
        headers: dict[str, str] | None = None,
    ) -> TransportResponse: ...


class Clock(Protocol):
    def now(self) -> datetime: ...
    def sleep(self, seconds: float) -> None: ...


class SystemClock:
    def now(self) -> datetime:
        return datetime.now(timezone.utc)

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class FakeClock:
    """Deterministic clock for tests: sleep() just advances time."""

    def __init__(self, start: datetime | None = None):
        self._now = start or datetime(2024, 1, 1, tzinfo=timezone.utc)

    def now(self) -> datetime:
        return self._now

    def sleep(self, seconds: float) -> None:
        self.advance(seconds)

    def advance(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot sleep a negative duration")
        self._now = self._now + timedelta(seconds=seconds)


class LiveTransport:
    """requests-backed transport for live scraping."""

    def __init__(self, timeout: float = 30.0):
        import requests

        self._session = requests.Session()
        self._timeout = timeout

    def get(self, url, params=None, headers=None) -> TransportResponse:
        import requests

        try:
            response = self._session.get(
                url, params=params, headers=headers, timeout=self._timeout
            )
        except requests.RequestException as exc:
            raise NetworkError(f"GET {url} failed: {exc}") from exc
        return TransportResponse(
            status=response.status_code,
            body=response.content,
            headers=dict(response.headers),
        )


def _request_key(url: str, params: dict | None) -> tuple:
    items = tuple(sorted((str(k), str(v)) for k, v in (params or {}).items()))
    return (url, items)


class ReplayTransport:
    """Serves recorded responses; raises on any request it has no record for.

    Fixture files are JSON documents of the form

        {"request": {"url": "...", "params": {...}},
         "response": {"status": 200, "json": {...}}}

    where the response body may be given as "json" or "text". Several
    recordings of the same request replay in order, the last one repeating.
    """

    def __init__(self):
        self._responses: dict[tuple, list[TransportResponse]] = {}
        self.request_log: list[tuple] = []

    @classmethod
    def from_dir(cls, fixture_dir: str | Path) -> "ReplayTransport":
        transport = cls()
        fixture_dir = Path(fixture_dir)
        if not fixture_dir.exists():
            raise NetworkError(f"fixture directory not found: {fixture_dir}")
        for path in sorted(fixture_dir.rglob("*.json")):
            doc = json.loads(path.read_text(encoding="utf-8"))
            request = doc.get("request", {})
            response = doc.get("response", {})
            if "json" in response:
                body = json.dumps(response["json"]).encode("utf-8")
            else:
                body = response.get("text", "").encode("utf-8")
            transport.record(
                request.get("url", ""),
                request.get("params") or {},
                TransportResponse(
                    status=int(response.get("status", 200)),
                    body=body,
                    headers=response.get("headers", {}),
                ),
            )
        return transport

    def record(
        self, url: str, params: dict | None, response: TransportResponse
    ) -> None:
        self._responses.setdefault(_request_key(url, params), []).append(response)

    def record_json(self, url: str, params: dict | None, payload, status: int = 200) -> None:
        self.record(
            url,
            params,
            TransportResponse(status=status, body=json.dumps(payload).encode("utf-8")),
        )

    def get(self, url, params=None, headers=None) -> TransportResponse:
        key = _request_key(url, params)
        self.request_log.append(key)
        queue = self._responses.get(key)
        if not queue:
            raise NetworkError(
                f"no recorded response for GET {url} with params {dict(params or {})}"
            )
        if len(queue) > 1:
            return queue.pop(0)
        return queue[0]
