import sys
from pathlib import Path

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey
from cryptography.hazmat.primitives.serialization import (
    Encoding, NoEncryption, PrivateFormat, PublicFormat,
)

# tests import the oracle module directly (tests/sw_oracle.py)
sys.path.insert(0, str(Path(__file__).parent))


def make_keypair() -> tuple[Ed25519PrivateKey, str]:
    """Ed25519 keypair; public half as raw hex, the registry wire form."""
    private = Ed25519PrivateKey.generate()
    public_hex = private.public_key().public_bytes(
        Encoding.Raw, PublicFormat.Raw).hex()
    return private, public_hex


def private_key_hex(private: Ed25519PrivateKey) -> str:
    return private.private_bytes(
        Encoding.Raw, PrivateFormat.Raw, NoEncryption()).hex()


def sign(private: Ed25519PrivateKey, body: bytes) -> str:
    return private.sign(body).hex()
