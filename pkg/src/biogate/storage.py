"""Append-only line-delimited journal.

State-changing operations append one JSON object per line; startup
replays the file through the same apply paths to rebuild in-memory
state. Records carry everything needed to re-apply them (ids,
timestamps, digests), so replay never re-runs clocks or RNGs.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Iterator


class Journal:
    def __init__(self, path: str | os.PathLike | None):
        self._path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._fh = None
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self._path, "a", encoding="utf-8")

    def append(self, record: dict) -> None:
        if self._fh is None:
            return
        line = json.dumps(record, sort_keys=True, ensure_ascii=False)
        with self._lock:
            self._fh.write(line + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())

    def replay(self) -> Iterator[dict]:
        if self._path is None or not self._path.exists():
            return
        with open(self._path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_jsonl(path: str | os.PathLike) -> Iterator[dict]:
    """Iterate line-delimited JSON objects from a UTF-8 file."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
