"""Structured request logging.

One JSON object per line, append-only. A log write must never take a
request down with it, so ``emit`` swallows every exception; diagnostics
are a best-effort side channel, not part of the service contract.
"""

from __future__ import annotations

import json
import os
import threading
from typing import Iterator, Optional

from .model import now_timestamp

LEVELS = ("debug", "info", "warn", "error")


def _rank(level: str) -> int:
    try:
        return LEVELS.index(level)
    except ValueError:
        return 0


class LogWriter:
    """Append-only JSONL writer for operational events."""

    def __init__(self, path: Optional[str], clock=now_timestamp):
        self.path = path
        self.clock = clock
        self._lock = threading.Lock()
        self._handle = None

    def emit(self, level: str, event: str, **fields) -> None:
        if self.path is None:
            return
        try:
            record = {"ts": self.clock(), "level": level, "event": event}
            record.update(fields)
            line = json.dumps(record, ensure_ascii=False, sort_keys=True)
            with self._lock:
                if self._handle is None:
                    os.makedirs(os.path.dirname(self.path) or ".", exist_ok=True)
                    self._handle = open(self.path, "a", encoding="utf-8")
                self._handle.write(line + "\n")
                self._handle.flush()
        except Exception:
            pass

    def close(self) -> None:
        with self._lock:
            if self._handle is not None:
                try:
                    self._handle.close()
                except Exception:
                    pass
                self._handle = None


def read_logs(
    path: str, level: Optional[str] = None, since: Optional[str] = None
) -> Iterator[dict]:
    """Yield log records at or above ``level`` and not older than ``since``.

    Unparseable lines are skipped; the log is advisory, and a torn write
    from a crash should not make the whole history unreadable.
    """
    floor = _rank(level) if level else 0
    if not os.path.exists(path):
        return
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                continue
            if not isinstance(record, dict):
                continue
            if _rank(str(record.get("level", "info"))) < floor:
                continue
            if since and str(record.get("ts", "")) < since:
                continue
            yield record
