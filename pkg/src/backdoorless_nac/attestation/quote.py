from __future__ import annotations

import hmac

from pydantic import ValidationError

from backdoorless_nac.attestation.errors import (
    BadSignature,
    EmptyLog,
    LogPcrMismatch,
    MalformedQuote,
    NonceMismatch,
    NotBooted,
    UnknownDevice,
)
from backdoorless_nac.attestation.measurement import replay_log, software_digest_from_log
from backdoorless_nac.attestation.nonce import NonceCache
from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.core.canonical import canonical_encode
from backdoorless_nac.core.signing import sign, verify
from backdoorless_nac.domain.entities.attestation import AttestationQuote, DeviceRegistry
from backdoorless_nac.domain.entities.firmware import SoftwareDigest
from backdoorless_nac.prover.state import ProverState

log = get_logger(__name__)


def generate_quote(state: ProverState | None, nonce: bytes) -> AttestationQuote:
    if state is None or not state.booted:
        raise NotBooted()
    payload = {
        "pcr": state.pcr.hex(),
        "nonce": nonce.hex(),
        "log": state.log,
        "device_id": state.device_id,
    }
    return AttestationQuote(
        **payload, signature=sign(state.device_key, canonical_encode(payload))
    )


def verify_quote(
    quote: AttestationQuote, expected_nonce: bytes, registry: DeviceRegistry
) -> SoftwareDigest:
    if not hmac.compare_digest(quote.nonce, expected_nonce.hex()):
        log.info("quote.verify nonce_mismatch device_id=%s", quote.device_id)
        raise NonceMismatch("quote nonce does not match the issued challenge")

    public = registry.devices.get(quote.device_id)
    if public is None:
        log.info("quote.verify unknown_device device_id=%s", quote.device_id)
        raise UnknownDevice(f"device {quote.device_id!r} is not enrolled")

    if not verify(public, quote.signature, canonical_encode(quote.signed_payload())):
        log.info("quote.verify bad_signature device_id=%s", quote.device_id)
        raise BadSignature()

    if not len(quote.log):
        raise EmptyLog()

    if replay_log(quote.log).hex() != quote.pcr:
        log.info("quote.verify log_pcr_mismatch device_id=%s pcr=%s", quote.device_id, quote.pcr)
        raise LogPcrMismatch()

    digest = software_digest_from_log(quote.log)
    log.info(
        "quote.verify ok device_id=%s pcr=%s aggregate=%s",
        quote.device_id,
        quote.pcr,
        digest.aggregate,
    )
    return digest


class AttestationVerifier:
    """Verifier side of the challenge/quote exchange with single-use nonces."""

    def __init__(self, registry: DeviceRegistry, nonces: NonceCache | None = None):
        self._registry = registry
        self._nonces = nonces if nonces is not None else NonceCache()

    def challenge(self) -> bytes:
        return self._nonces.issue()

    def verify(self, quote: AttestationQuote, expected_nonce: bytes) -> SoftwareDigest:
        if not self._nonces.consume(expected_nonce):
            raise NonceMismatch("challenge nonce expired or already used")
        return verify_quote(quote, expected_nonce, self._registry)


def parse_quote(message: dict) -> AttestationQuote:
    if message.get("type") != "quote":
        raise MalformedQuote(f"expected a quote message, got type={message.get('type')!r}")
    fields = {k: v for k, v in message.items() if k != "type"}
    try:
        return AttestationQuote.model_validate(fields)
    except ValidationError as e:
        raise MalformedQuote(f"invalid quote: {e.errors()[0].get('msg', e)}") from e
