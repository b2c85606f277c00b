"""Simulated device side of the attestation exchange."""
from __future__ import annotations

import asyncio
import re
from typing import Any, Literal

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from backdoorless_nac.attestation.errors import FrameError, MalformedChallenge
from backdoorless_nac.attestation.quote import generate_quote
from backdoorless_nac.attestation.wire import error_message, read_message, write_message
from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.core.canonical import ZERO_DIGEST, canonical_encode
from backdoorless_nac.core.signing import derive_private_key, sign
from backdoorless_nac.domain.entities.attestation import (
    AttestationQuote,
    MeasurementEvent,
    MeasurementLog,
)
from backdoorless_nac.errors import UsageError
from backdoorless_nac.prover.state import ProverState

log = get_logger(__name__)

TamperMode = Literal["log", "nonce", "key"]
TAMPER_MODES: tuple[str, ...] = ("log", "nonce", "key")

_NONCE_RE = re.compile(r"^[0-9a-f]{64}$")


def parse_challenge(message: Any) -> bytes:
    if not isinstance(message, dict) or message.get("type") != "challenge":
        raise MalformedChallenge("expected a challenge message")
    nonce = message.get("nonce")
    if not isinstance(nonce, str) or not _NONCE_RE.match(nonce):
        raise MalformedChallenge("challenge nonce must be 32 bytes of lowercase hex")
    return bytes.fromhex(nonce)


def _flip_first_event(measurement: MeasurementLog) -> MeasurementLog:
    first, *rest = measurement.events
    digest = bytearray(bytes.fromhex(first.digest))
    digest[0] ^= 0x01
    return MeasurementLog((MeasurementEvent(name=first.name, digest=digest.hex()), *rest))


def _resign(
    quote: AttestationQuote, signing_key: Ed25519PrivateKey, **changes: Any
) -> AttestationQuote:
    fields = {**quote.signed_payload(), **changes}
    return AttestationQuote(**fields, signature=sign(signing_key, canonical_encode(fields)))


class ProverAgent:
    """Answers challenges for one booted device.

    Tamper modes are test hooks: `log` mutates one measured digest, `nonce`
    replays the previous session's nonce and `key` signs with an unenrolled key.
    """

    def __init__(self, state: ProverState, tamper: TamperMode | None = None):
        if tamper is not None and tamper not in TAMPER_MODES:
            raise UsageError(f"unknown tamper mode {tamper!r}")
        self.state = state
        self.tamper = tamper
        self._last_nonce: bytes | None = None

    def handle_challenge(self, message: Any) -> dict[str, Any]:
        try:
            nonce = parse_challenge(message)
        except MalformedChallenge as e:
            log.warning(
                "prover.challenge.malformed device_id=%s detail=%s", self.state.device_id, e
            )
            return error_message("MalformedChallenge", e.message)

        answered = nonce
        if self.tamper == "nonce":
            # first session: a nonce the verifier never issued
            answered = self._last_nonce or ZERO_DIGEST
        self._last_nonce = nonce

        quote = generate_quote(self.state, answered)
        if self.tamper == "log":
            quote = _resign(quote, self.state.device_key, log=_flip_first_event(quote.log))
        elif self.tamper == "key":
            impostor = derive_private_key(0, f"impostor:{self.state.device_id}")
            quote = _resign(quote, impostor)

        log.info(
            "prover.quote device_id=%s tamper=%s pcr=%s",
            self.state.device_id,
            self.tamper,
            quote.pcr,
        )
        return quote.to_message()


async def run_prover(
    agent: ProverAgent, host: str, port: int, *, timeout: float = 10.0
) -> dict[str, Any]:
    """Connect, answer one challenge and return the verifier's final message."""
    reader, writer = await asyncio.wait_for(asyncio.open_connection(host, port), timeout)
    try:
        challenge = await asyncio.wait_for(read_message(reader), timeout)
        reply = agent.handle_challenge(challenge)
        await write_message(writer, reply)
        if reply.get("type") == "error":
            return reply
        try:
            answer = await asyncio.wait_for(read_message(reader), timeout)
        except FrameError as e:
            return error_message("FrameError", e.message)
        log.info(
            "prover.answer device_id=%s type=%s outcome=%s",
            agent.state.device_id,
            answer.get("type"),
            answer.get("outcome"),
        )
        return answer
    finally:
        writer.close()
        try:
            await writer.wait_closed()
        except (ConnectionError, OSError):
            pass
