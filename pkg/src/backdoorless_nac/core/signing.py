"""Ed25519 key material and detached signatures."""
from __future__ import annotations

import hashlib

from cryptography.exceptions import InvalidSignature as CryptoInvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from pydantic import BaseModel, ConfigDict

from backdoorless_nac.domain.value_objects.hex_types import Digest
from backdoorless_nac.errors import ParseError


class InspectorKey(BaseModel):
    """Signing key of an inspector organization, as stored in a key file."""

    model_config = ConfigDict(frozen=True)

    org: str
    key_id: str
    private_key_hex: Digest

    def private_key(self) -> Ed25519PrivateKey:
        return load_private_key(self.private_key_hex)


class DeviceIdentity(BaseModel):
    model_config = ConfigDict(frozen=True)

    device_id: str
    private_key_hex: Digest

    def private_key(self) -> Ed25519PrivateKey:
        return load_private_key(self.private_key_hex)


def generate_private_key() -> Ed25519PrivateKey:
    return Ed25519PrivateKey.generate()


def derive_private_key(seed: int, label: str) -> Ed25519PrivateKey:
    # deterministic keys for scenarios and tests
    material = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return Ed25519PrivateKey.from_private_bytes(material)


def private_key_hex(key: Ed25519PrivateKey) -> str:
    return key.private_bytes(
        encoding=serialization.Encoding.Raw,
        format=serialization.PrivateFormat.Raw,
        encryption_algorithm=serialization.NoEncryption(),
    ).hex()


def public_key_hex(key: Ed25519PrivateKey) -> str:
    return (
        key.public_key()
        .public_bytes(encoding=serialization.Encoding.Raw, format=serialization.PublicFormat.Raw)
        .hex()
    )


def load_private_key(hex_seed: str) -> Ed25519PrivateKey:
    try:
        return Ed25519PrivateKey.from_private_bytes(bytes.fromhex(hex_seed))
    except ValueError as e:
        raise ParseError(f"invalid Ed25519 private key: {e}") from e


def sign(key: Ed25519PrivateKey, data: bytes) -> str:
    return key.sign(data).hex()


def verify(public_hex: str, signature_hex: str, data: bytes) -> bool:
    try:
        public = Ed25519PublicKey.from_public_bytes(bytes.fromhex(public_hex))
        public.verify(bytes.fromhex(signature_hex), data)
    except (CryptoInvalidSignature, ValueError):
        return False
    return True
