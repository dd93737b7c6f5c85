"""Periodic harvest cycle across all configured OSINT sources."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, asdict, field

from .cursors import SourceCursor
from .transport import Clock

logger = logging.getLogger(__name__)

DEFAULT_INTERVAL_SECONDS = 3600.0
CYCLE_CURSOR = "cycle"


@dataclass
class SourceReport:
    source: str
    entries: int
    seconds: float
    ok: bool
    error: str | None = None


@dataclass
class CycleReport:
    started: str
    reports: list[SourceReport] = field(default_factory=list)

    @property
    def total_entries(self) -> int:
        return sum(r.entries for r in self.reports)

    def to_json(self) -> str:
        return json.dumps(
            {"started": self.started, "sources": [asdict(r) for r in self.reports]},
            indent=2,
            sort_keys=True,
        )

    def to_table(self) -> str:
        lines = [f"{'source':<12} {'time (s)':>10} {'entries':>10}  status"]
        for report in self.reports:
            status = "ok" if report.ok else f"FAILED: {report.error}"
            lines.append(
                f"{report.source:<12} {report.seconds:>10.2f} {report.entries:>10d}  {status}"
            )
        return "\n".join(lines)


class Harvester:
    """Runs every source's incremental fetch; one failure never blocks the rest."""

    def __init__(
        self,
        store,
        sources: list,
        clock: Clock,
        interval_seconds: float = DEFAULT_INTERVAL_SECONDS,
    ):
        self._store = store
        self._sources = sources
        self._clock = clock
        self._interval = interval_seconds

    def run_cycle(self) -> CycleReport:
        report = CycleReport(started=self._clock.now().isoformat())
        for source in self._sources:
            cursor = SourceCursor.load(self._store, source.name)
            start = time.perf_counter()
            try:
                entries, cursor = source.run(self._store, cursor)
                cursor.last_run = self._clock.now().isoformat()
                cursor.consecutive_failures = 0
                self._store.save_cursor(source.name, cursor.to_doc())
                report.reports.append(
                    SourceReport(
                        source=source.name,
                        entries=entries,
                        seconds=time.perf_counter() - start,
                        ok=True,
                    )
                )
            except Exception as exc:  # keep other sources running
                logger.error("source %s failed: %s", source.name, exc)
                # Reload: a paged source may already have committed cursors.
                failed = SourceCursor.load(self._store, source.name)
                failed.consecutive_failures += 1
                failed.last_run = self._clock.now().isoformat()
                self._store.save_cursor(source.name, failed.to_doc())
                report.reports.append(
                    SourceReport(
                        source=source.name,
                        entries=0,
                        seconds=time.perf_counter() - start,
                        ok=False,
                        error=str(exc),
                    )
                )
        self._store.relink_all()
        self._store.save_cursor(
            CYCLE_CURSOR, {"last_run": self._clock.now().isoformat()}
        )
        return report

    def run_due(self) -> CycleReport | None:
        """Run a cycle when the schedule interval has elapsed, else no-op."""
        state = self._store.load_cursor(CYCLE_CURSOR)
        if state and state.get("last_run"):
            from ..records import parse_timestamp

            elapsed = (
                self._clock.now() - parse_timestamp(state["last_run"])
            ).total_seconds()
            if elapsed < self._interval:
                return None
        return self.run_cycle()
