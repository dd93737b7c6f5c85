"""Per-source sync state, persisted next to the data it describes."""
from __future__ import annotations

from dataclasses import dataclass, asdict


@dataclass
class SourceCursor:
    source: str
    watermark: str | None = None        # ISO timestamp of the newest ingested change
    page_offset: int = 0
    last_run: str | None = None
    consecutive_failures: int = 0

    def to_doc(self) -> dict:
        return asdict(self)

    @classmethod
    def from_doc(cls, doc: dict) -> "SourceCursor":
        return cls(**doc)

    @classmethod
    def load(cls, store, source: str) -> "SourceCursor":
        doc = store.load_cursor(source)
        return cls.from_doc(doc) if doc else cls(source=source)
