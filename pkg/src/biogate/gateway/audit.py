"""Hash-chained, tamper-evident audit log.

Each event's hash covers its predecessor's hash and a canonical
length-prefixed encoding of its own fields, so modifying any byte of
any persisted event breaks verification from that point on. A separate
head file records the expected length and head hash; a truncated tail
still verifies as a prefix but the head check reports the mismatch.

Canonical event encoding (without the hash): length-prefixed fields in
fixed order seq (8-byte BE), prev_hash (raw 32), actor (UTF-8),
action (UTF-8), payload_digest (raw 32), at (8-byte BE seconds).
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from ..canonical import ZERO_DIGEST, digest_value, length_prefixed, sha256


@dataclass(frozen=True)
class AuditEvent:
    seq: int
    prev_hash: bytes
    actor: str
    action: str
    payload_digest: bytes
    at: int
    hash: bytes

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "prev_hash": self.prev_hash.hex(),
            "actor": self.actor,
            "action": self.action,
            "payload_digest": self.payload_digest.hex(),
            "at": self.at,
            "hash": self.hash.hex(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> AuditEvent:
        return cls(seq=d["seq"], prev_hash=bytes.fromhex(d["prev_hash"]),
                   actor=d["actor"], action=d["action"],
                   payload_digest=bytes.fromhex(d["payload_digest"]),
                   at=d["at"], hash=bytes.fromhex(d["hash"]))


def canonical_event_bytes(seq: int, prev_hash: bytes, actor: str, action: str,
                          payload_digest: bytes, at: int) -> bytes:
    return length_prefixed(
        seq.to_bytes(8, "big"),
        prev_hash,
        actor.encode("utf-8"),
        action.encode("utf-8"),
        payload_digest,
        at.to_bytes(8, "big"),
    )


def event_hash(seq: int, prev_hash: bytes, actor: str, action: str,
               payload_digest: bytes, at: int) -> bytes:
    body = canonical_event_bytes(seq, prev_hash, actor, action, payload_digest, at)
    return sha256(prev_hash + body)


@dataclass
class VerifyReport:
    ok: bool
    first_bad_seq: int | None = None
    length_mismatch: bool = False
    expected_length: int | None = None
    actual_length: int = 0

    def to_dict(self) -> dict:
        return {"ok": self.ok, "first_bad_seq": self.first_bad_seq,
                "length_mismatch": self.length_mismatch,
                "expected_length": self.expected_length,
                "actual_length": self.actual_length}


def verify_chain(events: list[AuditEvent],
                 expected_length: int | None = None,
                 expected_head: bytes | None = None) -> VerifyReport:
    """Recompute every hash; report the first break, plus head-pointer drift."""
    prev = ZERO_DIGEST
    for i, ev in enumerate(events):
        if ev.seq != i or ev.prev_hash != prev:
            return VerifyReport(False, first_bad_seq=i, actual_length=len(events))
        recomputed = event_hash(ev.seq, ev.prev_hash, ev.actor, ev.action,
                                ev.payload_digest, ev.at)
        if recomputed != ev.hash:
            return VerifyReport(False, first_bad_seq=i, actual_length=len(events))
        prev = ev.hash
    mismatch = False
    if expected_length is not None and expected_length != len(events):
        mismatch = True
    if expected_head is not None and events and events[-1].hash != expected_head:
        mismatch = True
    return VerifyReport(not mismatch, length_mismatch=mismatch,
                        expected_length=expected_length, actual_length=len(events))


class AuditLog:
    """Single-writer append-only log, persisted write-ahead.

    ``append`` returns only after the event line and the head pointer
    are durably on disk; callers must not respond to a client before
    their append returns.
    """

    def __init__(self, path: str | os.PathLike | None = None,
                 clock: Callable[[], float] = time.time):
        self._clock = clock
        self._lock = threading.Lock()
        self.events: list[AuditEvent] = []
        self._path = Path(path) if path is not None else None
        self._head_path = self._path.with_suffix(".head") if self._path else None
        self._fh = None
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            if self._path.exists():
                with open(self._path, encoding="utf-8") as fh:
                    for line in fh:
                        line = line.strip()
                        if line:
                            self.events.append(AuditEvent.from_dict(json.loads(line)))
            self._fh = open(self._path, "a", encoding="utf-8")

    def append(self, actor: str, action: str, payload) -> AuditEvent:
        with self._lock:
            seq = len(self.events)
            prev = self.events[-1].hash if self.events else ZERO_DIGEST
            digest = digest_value(payload)
            at = int(self._clock())
            ev = AuditEvent(
                seq=seq, prev_hash=prev, actor=actor, action=action,
                payload_digest=digest, at=at,
                hash=event_hash(seq, prev, actor, action, digest, at))
            if self._fh is not None:
                self._fh.write(json.dumps(ev.to_dict()) + "\n")
                self._fh.flush()
                os.fsync(self._fh.fileno())
                self._write_head(seq + 1, ev.hash)
            self.events.append(ev)
            return ev

    def _write_head(self, length: int, head: bytes) -> None:
        tmp = self._head_path.with_suffix(".head.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"length": length, "head_hash": head.hex()}))
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self._head_path)

    def read_head(self) -> tuple[int, bytes] | None:
        if self._head_path is None or not self._head_path.exists():
            return None
        with open(self._head_path, encoding="utf-8") as fh:
            head = json.loads(fh.read())
        return head["length"], bytes.fromhex(head["head_hash"])

    def verify(self) -> VerifyReport:
        with self._lock:
            head = self.read_head()
            expected_length, expected_head = head if head else (None, None)
            return verify_chain(list(self.events), expected_length, expected_head)

    def close(self) -> None:
        if self._fh is not None:
            if self.events and self._head_path is not None:
                self._write_head(len(self.events), self.events[-1].hash)
            self._fh.close()
            self._fh = None


def load_events(path: str | os.PathLike) -> list[AuditEvent]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(AuditEvent.from_dict(json.loads(line)))
    return events
