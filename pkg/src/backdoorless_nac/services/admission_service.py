from __future__ import annotations

import asyncio
from typing import Protocol

from backdoorless_nac.attestation.errors import AttestationError, FrameError
from backdoorless_nac.attestation.nonce import NonceCache
from backdoorless_nac.attestation.quote import AttestationVerifier, parse_quote
from backdoorless_nac.attestation.wire import (
    challenge_message,
    error_message,
    read_message,
    write_message,
)
from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.core.canonical import digest_of
from backdoorless_nac.domain.entities.attestation import AttestationResult, DeviceRegistry
from backdoorless_nac.domain.entities.certificate import CertificateLookup, TrustStore
from backdoorless_nac.domain.entities.policy import Decision, SecurityPolicy
from backdoorless_nac.policy.evaluation import evaluate_admission
from backdoorless_nac.repositories.audit_repository import AuditLog

log = get_logger(__name__)


class CertificateSource(Protocol):
    async def lookup(self, aggregate: str) -> CertificateLookup: ...


class AdmissionService:
    """Admission decision point: attestation, certificate lookup, policy, audit."""

    def __init__(
        self,
        *,
        policy: SecurityPolicy,
        trust: TrustStore,
        registry: DeviceRegistry,
        certificates: CertificateSource,
        audit: AuditLog,
        nonces: NonceCache | None = None,
        session_timeout: float = 10.0,
    ):
        self._policy = policy
        self._trust = trust
        self._certificates = certificates
        self._audit = audit
        self._verifier = AttestationVerifier(
            registry, nonces if nonces is not None else NonceCache()
        )
        self._timeout = session_timeout

    async def decide_admission(
        self, attestation: AttestationResult, lookup: CertificateLookup | None
    ) -> Decision:
        decision = evaluate_admission(attestation, lookup, self._policy, self._trust)
        await self._audit.append(decision)
        log.info(
            "admission.decision device_id=%s outcome=%s reasons=%s obligations=%s cert=%s",
            decision.evidence.device_id,
            decision.outcome,
            [r.value for r in decision.reasons],
            [o.kind for o in decision.obligations],
            decision.evidence.certificate_body_digest,
        )
        return decision

    async def attest(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> AttestationResult:
        nonce = self._verifier.challenge()
        device_id = None
        try:
            await write_message(writer, challenge_message(nonce))
            message = await asyncio.wait_for(read_message(reader), self._timeout)
            if message.get("type") == "error":
                return AttestationResult(
                    ok=False,
                    error=str(message.get("code") or "ProverError"),
                    detail=str(message.get("detail") or ""),
                )
            quote = parse_quote(message)
            device_id = quote.device_id
            digest = self._verifier.verify(quote, nonce)
        except AttestationError as e:
            log.info("admission.attest.failed device_id=%s error=%s", device_id, e.error_code)
            return AttestationResult(
                ok=False, device_id=device_id, error=e.error_code, detail=e.message
            )
        except asyncio.TimeoutError:
            log.info("admission.attest.timeout timeout=%s", self._timeout)
            return AttestationResult(ok=False, error="Timeout", detail="no quote before timeout")
        except (ConnectionError, OSError) as e:
            return AttestationResult(ok=False, error="ConnectionError", detail=str(e))

        return AttestationResult(
            ok=True,
            device_id=quote.device_id,
            pcr=quote.pcr,
            quote_digest=digest_of(quote),
            software_digest=digest,
        )

    async def run_session(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> Decision | None:
        """One prover connection: challenge, quote, lookup, decide, answer."""
        peer = writer.get_extra_info("peername")
        log.info("admission.session.start peer=%s", peer)
        decision = None
        try:
            attestation = await self.attest(reader, writer)
            lookup = None
            if attestation.ok and attestation.software_digest is not None:
                lookup = await self._certificates.lookup(attestation.software_digest.aggregate)
            decision = await self.decide_admission(attestation, lookup)
            await write_message(writer, decision.to_message())
        except (ConnectionError, OSError, FrameError) as e:
            log.info("admission.session.dropped peer=%s error=%s", peer, e)
        except Exception as e:
            # no decision reaches the prover, which leaves it unadmitted
            log.exception("admission.session.failed peer=%s error=%s", peer, e)
            try:
                await write_message(writer, error_message("InternalError", "admission failed"))
            except (ConnectionError, OSError):
                pass
        finally:
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass
        return decision
