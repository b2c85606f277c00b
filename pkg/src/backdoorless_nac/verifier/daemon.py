"""Admission daemon: accepts prover connections and runs one session per connection."""
from __future__ import annotations

import asyncio

from backdoorless_nac.attestation.nonce import NonceCache
from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.configs.settings import VerifierSettings, parse_listen
from backdoorless_nac.core.loaders import load_device_registry, load_policy, load_trust_store
from backdoorless_nac.errors import BindFailure
from backdoorless_nac.repositories.audit_repository import AuditLog
from backdoorless_nac.services.admission_service import AdmissionService
from backdoorless_nac.webclient.cert_server_client import CertServerClient

log = get_logger(__name__)


def build_admission_service(
    settings: VerifierSettings, client: CertServerClient
) -> AdmissionService:
    return AdmissionService(
        policy=load_policy(settings.policy_path),
        trust=load_trust_store(settings.trust_store_path),
        registry=load_device_registry(settings.device_registry_path),
        certificates=client,
        audit=AuditLog(settings.audit_log_path),
        nonces=NonceCache(ttl_seconds=settings.nonce_ttl_seconds),
        session_timeout=settings.session_timeout_seconds,
    )


async def start_verifier(service: AdmissionService, host: str, port: int) -> asyncio.Server:
    async def handle(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        await service.run_session(reader, writer)

    try:
        server = await asyncio.start_server(handle, host, port)
    except OSError as e:
        raise BindFailure(f"cannot listen on {host}:{port}: {e.strerror or e}") from e
    bound = server.sockets[0].getsockname()
    log.info("verifierd.listen host=%s port=%s", bound[0], bound[1])
    return server


async def serve_verifier(settings: VerifierSettings) -> None:
    host, port = parse_listen(settings.listen)
    async with CertServerClient(
        settings.cert_server_url, timeout=settings.cert_server_timeout_seconds
    ) as client:
        service = build_admission_service(settings, client)
        server = await start_verifier(service, host, port)
        async with server:
            await server.serve_forever()
