"""Deterministic serialization and digests.

Canonical JSON: UTF-8, keys sorted, no insignificant whitespace,
non-ASCII emitted raw. Two hosts encoding the same value produce the
same bytes, which is what record ids and signatures are computed over.
"""

from __future__ import annotations

import hashlib
import json
import uuid

ZERO_DIGEST = b"\x00" * 32


def canonical_json(value) -> bytes:
    return json.dumps(
        value, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_value(value) -> bytes:
    """SHA-256 over the canonical JSON encoding of ``value``."""
    return sha256(canonical_json(value))


def length_prefixed(*fields: bytes) -> bytes:
    """Concatenate fields, each preceded by a 4-byte big-endian length."""
    out = bytearray()
    for f in fields:
        out += len(f).to_bytes(4, "big")
        out += f
    return bytes(out)


def new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:20]}"
