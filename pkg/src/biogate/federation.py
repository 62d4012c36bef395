"""Cross-host shared exclusion registry.

Hosts publish Ed25519-signed revocation records; peers pull, verify and
merge them into a grow-only set keyed by content digest. Merge is
commutative, associative and idempotent, so any pull order converges.

Canonical record body (bit-exact across hosts): UTF-8 JSON of
{"aliases": [...sorted], "issued_at": int, "issuer_host": str,
"name": str, "reason_code": str, "subject_kind": str} with keys
sorted and separators (",", ":"), no trailing newline. record_id is
the lowercase hex SHA-256 of those bytes; the signature is Ed25519
over the same bytes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .canonical import canonical_json, sha256_hex
from .errors import TransportError
from .registry import ExclusionEntry, ReasonCode, normalize_name


class SubjectKind(str, Enum):
    PRINCIPAL = "principal"
    INSTITUTION = "institution"


@dataclass(frozen=True)
class RevocationRecord:
    record_id: str
    name: str                       # normalized
    aliases: tuple[str, ...]        # normalized, sorted
    subject_kind: SubjectKind
    issuer_host: str
    reason_code: ReasonCode
    issued_at: int
    signature: str                  # hex

    def body_bytes(self) -> bytes:
        return canonical_body(self.name, self.aliases, self.subject_kind,
                              self.issuer_host, self.reason_code, self.issued_at)

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "name": self.name,
            "aliases": list(self.aliases),
            "subject_kind": self.subject_kind.value,
            "issuer_host": self.issuer_host,
            "reason_code": self.reason_code.value,
            "issued_at": self.issued_at,
            "signature": self.signature,
        }

    @classmethod
    def from_dict(cls, d: dict) -> RevocationRecord:
        return cls(
            record_id=d["record_id"],
            name=d["name"],
            aliases=tuple(d["aliases"]),
            subject_kind=SubjectKind(d["subject_kind"]),
            issuer_host=d["issuer_host"],
            reason_code=ReasonCode(d["reason_code"]),
            issued_at=int(d["issued_at"]),
            signature=d["signature"],
        )


def canonical_body(name: str, aliases: Iterable[str], subject_kind: SubjectKind,
                   issuer_host: str, reason_code: ReasonCode, issued_at: int) -> bytes:
    return canonical_json({
        "aliases": sorted(aliases),
        "issued_at": int(issued_at),
        "issuer_host": issuer_host,
        "name": name,
        "reason_code": ReasonCode(reason_code).value,
        "subject_kind": SubjectKind(subject_kind).value,
    })


def publish_revocation(name: str, aliases: Iterable[str],
                       subject_kind: SubjectKind | str, issuer_host: str,
                       signing_key: Ed25519PrivateKey,
                       reason_code: ReasonCode = ReasonCode.HOST_REVOCATION,
                       issued_at: int | None = None) -> RevocationRecord:
    """Sign a revocation of a normalized subject under the host key."""
    name = normalize_name(name)
    norm_aliases = tuple(sorted(normalize_name(a) for a in aliases))
    kind = SubjectKind(subject_kind)
    at = int(time.time()) if issued_at is None else int(issued_at)
    body = canonical_body(name, norm_aliases, kind, issuer_host, reason_code, at)
    return RevocationRecord(
        record_id=sha256_hex(body),
        name=name,
        aliases=norm_aliases,
        subject_kind=kind,
        issuer_host=issuer_host,
        reason_code=ReasonCode(reason_code),
        issued_at=at,
        signature=signing_key.sign(body).hex(),
    )


@dataclass(frozen=True)
class VerifyResult:
    valid: bool
    reason: str | None = None       # unknown_issuer | bad_signature | id_mismatch


def verify_record(record: RevocationRecord,
                  peer_keys: dict[str, str]) -> VerifyResult:
    key_hex = peer_keys.get(record.issuer_host)
    if key_hex is None:
        return VerifyResult(False, "unknown_issuer")
    body = record.body_bytes()
    if record.record_id != sha256_hex(body):
        return VerifyResult(False, "id_mismatch")
    try:
        key = Ed25519PublicKey.from_public_bytes(bytes.fromhex(key_hex))
        key.verify(bytes.fromhex(record.signature), body)
    except (InvalidSignature, ValueError):
        return VerifyResult(False, "bad_signature")
    return VerifyResult(True)


@dataclass
class MergeReport:
    accepted: int = 0
    rejected: int = 0
    rejections: list[tuple[str, str]] = field(default_factory=list)


class SharedRegistry:
    """Grow-only verified record set plus the peer key ring."""

    def __init__(self, peer_keys: dict[str, str] | None = None,
                 journal=None, audit=None):
        self.peer_keys: dict[str, str] = dict(peer_keys or {})
        self.records: dict[str, RevocationRecord] = {}
        self.cursors: dict[str, int] = {}
        self._journal = journal
        self._audit = audit or (lambda actor, action, payload: None)

    def apply(self, rec: dict) -> None:
        kind = rec["t"]
        if kind == "fed_record":
            record = RevocationRecord.from_dict(rec["record"])
            self.records[record.record_id] = record
        elif kind == "fed_cursor":
            self.cursors[rec["peer"]] = int(rec["since"])
        else:
            raise ValueError(f"unknown federation record {kind!r}")

    def _commit(self, rec: dict) -> None:
        if self._journal is not None:
            self._journal.append(rec)
        self.apply(rec)

    def merge(self, incoming: Iterable[RevocationRecord]) -> MergeReport:
        """Verify and union incoming records; invalid ones never enter."""
        report = MergeReport()
        for record in incoming:
            result = verify_record(record, self.peer_keys)
            if not result.valid:
                report.rejected += 1
                report.rejections.append((record.record_id, result.reason))
                self._audit("federation", "record_rejected",
                            {"record_id": record.record_id, "reason": result.reason})
                continue
            if record.record_id not in self.records:
                self._commit({"t": "fed_record", "record": record.to_dict()})
                self._audit("federation", "record_merged",
                            {"record_id": record.record_id,
                             "issuer_host": record.issuer_host})
            report.accepted += 1
        return report

    def records_since(self, since: int) -> list[RevocationRecord]:
        """Records newer than the cursor, ordered by (issued_at, record_id)."""
        out = [r for r in self.records.values() if r.issued_at > since]
        return sorted(out, key=lambda r: (r.issued_at, r.record_id))

    def as_exclusion_entries(self) -> list[ExclusionEntry]:
        """Bright-line view of merged revocations for adjudication."""
        return [
            ExclusionEntry(
                entry_id=f"fed:{r.record_id}",
                subject_name=r.name,
                subject_aliases=frozenset(r.aliases),
                source_list=f"federation:{r.issuer_host}",
                reason_code=r.reason_code,
                effective_at=float(r.issued_at),
            )
            for r in self.records.values()
        ]

    def advance_cursor(self, peer: str, since: int) -> None:
        if since > self.cursors.get(peer, -1):
            self._commit({"t": "fed_cursor", "peer": peer, "since": int(since)})

    def pull_from(self, peer: str,
                  fetch: Callable[[str, int], list[RevocationRecord]]) -> MergeReport:
        """Pull records newer than our cursor from one peer and merge.

        ``fetch(peer, since)`` raises TransportError when unreachable;
        the cursor then stays where it was.
        """
        since = self.cursors.get(peer, 0)
        records = fetch(peer, since)
        report = self.merge(records)
        if records:
            self.advance_cursor(peer, max(r.issued_at for r in records))
        return report
