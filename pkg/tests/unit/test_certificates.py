from __future__ import annotations

import json
import random

import pytest

from backdoorless_nac.core.canonical import canonical_encode
from backdoorless_nac.core.certificates import body_digest, sign_certificate, verify_certificate
from backdoorless_nac.core.signing import (
    derive_private_key,
    load_private_key,
    private_key_hex,
    public_key_hex,
    sign,
    verify,
)
from backdoorless_nac.domain.entities.certificate import SignedCertificate
from backdoorless_nac.errors import (
    AppError,
    BadSignature,
    DigestMismatch,
    InvalidSignature,
    ParseError,
    UnknownSigner,
)


def test_issue_then_verify_round_trip(bundle, issue, trust_store) -> None:
    cert = issue(bundle)
    verified = verify_certificate(cert, trust_store)
    assert verified.body == cert.body
    assert verified.inspector_org == "acme-labs"
    assert verified.body_digest == body_digest(cert.body)


def test_verification_survives_a_json_round_trip(bundle, issue, trust_store) -> None:
    cert = issue(bundle)
    restored = SignedCertificate.model_validate(json.loads(canonical_encode(cert)))
    assert canonical_encode(restored) == canonical_encode(cert)
    verify_certificate(restored, trust_store)


def test_unknown_org_or_key_id_is_unknown_signer(bundle, issue, trust_store) -> None:
    cert = issue(bundle)
    with pytest.raises(UnknownSigner):
        verify_certificate(cert.model_copy(update={"signer_key_id": "k9"}), trust_store)

    stranger = derive_private_key(7, "org:nobody")
    body = cert.body.model_copy(update={"inspector_org": "nobody"})
    with pytest.raises(UnknownSigner):
        verify_certificate(sign_certificate(body, stranger, "k1"), trust_store)


def test_edited_body_is_a_digest_mismatch(bundle, issue, trust_store) -> None:
    cert = issue(bundle)
    edited = cert.model_copy(
        update={"body": cert.body.model_copy(update={"bundle_version": "9.9"})}
    )
    with pytest.raises(DigestMismatch):
        verify_certificate(edited, trust_store)


def test_signature_by_another_key_is_rejected(bundle, issue, trust_store, rogue_key) -> None:
    cert = issue(bundle)
    forged = cert.model_copy(
        update={"signature": sign(rogue_key, bytes.fromhex(cert.body_digest))}
    )
    with pytest.raises(BadSignature):
        verify_certificate(forged, trust_store)


def test_org_swap_with_other_orgs_key_id_fails(bundle, issue, trust_store) -> None:
    # body claims shady-labs but the signature is acme-labs'
    cert = issue(bundle)
    body = cert.body.model_copy(update={"inspector_org": "shady-labs"})
    swapped = cert.model_copy(update={"body": body, "body_digest": body_digest(body)})
    with pytest.raises(InvalidSignature):
        verify_certificate(swapped, trust_store)


def test_single_byte_mutations_never_verify(bundle, issue, trust_store) -> None:
    cert = issue(bundle)
    original = canonical_encode(cert)
    rng = random.Random(2024)
    rejected = 0
    for _ in range(1000):
        mutated = bytearray(original)
        pos = rng.randrange(len(mutated))
        mutated[pos] = (mutated[pos] + rng.randint(1, 255)) % 256
        try:
            candidate = SignedCertificate.model_validate(json.loads(bytes(mutated)))
            verify_certificate(candidate, trust_store)
        except (ValueError, AppError):
            rejected += 1
            continue
        # accepted only when it parses back to the very same document
        assert canonical_encode(candidate) == original
    assert rejected > 900


def test_deterministic_keys() -> None:
    a = derive_private_key(1, "org:x")
    b = derive_private_key(1, "org:x")
    assert public_key_hex(a) == public_key_hex(b)
    assert public_key_hex(a) != public_key_hex(derive_private_key(2, "org:x"))
    assert public_key_hex(load_private_key(private_key_hex(a))) == public_key_hex(a)


def test_verify_rejects_garbage_inputs() -> None:
    key = derive_private_key(1, "k")
    sig = sign(key, b"data")
    assert verify(public_key_hex(key), sig, b"data")
    assert not verify(public_key_hex(key), sig, b"other")
    assert not verify("00" * 31, sig, b"data")
    assert not verify(public_key_hex(key), "zz", b"data")


def test_bad_private_key_hex_is_parse_error() -> None:
    with pytest.raises(ParseError):
        load_private_key("abcd")
