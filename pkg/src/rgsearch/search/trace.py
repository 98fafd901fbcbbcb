"""Trace event recording for search runs.

Events carry a logical timestamp (a per-run counter), so two runs with the
same seed and backends write byte-identical JSONL trace files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, TextIO

from ..core.types import EventKind, TraceEvent


def event_json(event: TraceEvent) -> str:
    return json.dumps(event.to_dict(), sort_keys=True, separators=(",", ":"))


class TraceRecorder:
    """Collects trace events and optionally streams them to a JSONL file."""

    def __init__(self, tree_id: str, path: Path | str | None = None) -> None:
        self.tree_id = tree_id
        self.events: list[TraceEvent] = []
        self._clock = 0
        self._sink: TextIO | None = open(path, "w", encoding="utf-8") if path is not None else None

    def emit(self, kind: EventKind, **payload: Any) -> TraceEvent:
        event = TraceEvent(timestamp=self._clock, tree_id=self.tree_id, event=kind, payload=payload)
        self._clock += 1
        self.events.append(event)
        if self._sink is not None:
            self._sink.write(event_json(event) + "\n")
        return event

    def close(self) -> None:
        if self._sink is not None:
            self._sink.close()
            self._sink = None

    def __enter__(self) -> TraceRecorder:
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
