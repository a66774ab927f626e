"""Append-only JSONL event log used by the store and the account directory.

Every state change is appended as one JSON object per line.  On open the
owning component replays the file through the same apply function it uses
at runtime, so the in-memory state after a restart is byte-for-byte the
state that produced the log.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Any, Iterator


class EventLog:
    """One JSONL file plus the bookkeeping to append and replay it."""

    def __init__(self, path: str):
        self.path = path
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)
        # Line-buffered append handle, opened lazily so replay sees a
        # consistent snapshot before any new writes land.
        self._handle = None

    def replay(self) -> Iterator[dict[str, Any]]:
        """Yield every event in write order.

        A truncated final line (interrupted write) is skipped rather than
        treated as corruption; anything malformed earlier in the file is a
        real error.
        """
        if not os.path.exists(self.path):
            return
        with open(self.path, "rb") as fh:
            raw = fh.read()
        if not raw:
            return
        lines = raw.split(b"\n")
        # A well-formed log ends with a newline, leaving one empty tail.
        complete, tail = lines[:-1], lines[-1]
        for i, line in enumerate(complete):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{self.path}:{i + 1}: corrupt event log line") from exc
        if tail.strip():
            # Partial trailing record from an interrupted append.  If it
            # happens to parse it was merely missing its newline; keep it.
            try:
                yield json.loads(tail)
            except json.JSONDecodeError:
                pass

    def append(self, event: dict[str, Any]) -> None:
        if self._handle is None:
            self._handle = open(self.path, "a", encoding="utf-8")
        self._handle.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")
        self._handle.flush()
        os.fsync(self._handle.fileno())

    def rewrite(self, events: list[dict[str, Any]]) -> None:
        """Atomically replace the log contents, e.g. after compaction."""
        self.close()
        directory = os.path.dirname(os.path.abspath(self.path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                for event in events:
                    fh.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def __enter__(self) -> "EventLog":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()
