from __future__ import annotations

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.core.canonical import canonical_encode, sha256, sha256_hex
from backdoorless_nac.core.signing import sign, verify
from backdoorless_nac.domain.entities.certificate import (
    CertificateBody,
    SignedCertificate,
    TrustStore,
    VerifiedCertificate,
)
from backdoorless_nac.errors import BadSignature, DigestMismatch, UnknownSigner

log = get_logger(__name__)


def body_digest(body: CertificateBody) -> str:
    return sha256_hex(canonical_encode(body))


def sign_certificate(
    body: CertificateBody, signing_key: Ed25519PrivateKey, key_id: str
) -> SignedCertificate:
    digest = body_digest(body)
    signature = sign(signing_key, bytes.fromhex(digest))
    log.info(
        "cert.sign org=%s key_id=%s body_digest=%s aggregate=%s",
        body.inspector_org,
        key_id,
        digest,
        body.software_digest.aggregate,
    )
    return SignedCertificate(
        body=body, body_digest=digest, signature=signature, signer_key_id=key_id
    )


def verify_certificate(cert: SignedCertificate, trust: TrustStore) -> VerifiedCertificate:
    org = cert.body.inspector_org
    public = trust.public_key(org, cert.signer_key_id)
    if public is None:
        log.info("cert.verify unknown_signer org=%s key_id=%s", org, cert.signer_key_id)
        raise UnknownSigner(f"no key {cert.signer_key_id!r} registered for {org!r}")

    recomputed = sha256(canonical_encode(cert.body))
    if recomputed.hex() != cert.body_digest:
        log.info("cert.verify digest_mismatch org=%s body_digest=%s", org, cert.body_digest)
        raise DigestMismatch("certificate body does not match body_digest")

    if not verify(public, cert.signature, recomputed):
        log.info("cert.verify bad_signature org=%s body_digest=%s", org, cert.body_digest)
        raise BadSignature()

    return VerifiedCertificate(
        body=cert.body,
        body_digest=cert.body_digest,
        inspector_org=org,
        signer_key_id=cert.signer_key_id,
    )
