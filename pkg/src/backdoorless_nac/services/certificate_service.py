from __future__ import annotations

import re

from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.core.certificates import verify_certificate
from backdoorless_nac.domain.entities.certificate import SignedCertificate, TrustStore
from backdoorless_nac.errors import BadDigest
from backdoorless_nac.repositories.certificate_repository import CertificateStore

log = get_logger(__name__)

_AGGREGATE_RE = re.compile(r"^[0-9a-f]{64}$")


class CertificateService:
    def __init__(self, store: CertificateStore, trust: TrustStore):
        self._store = store
        self._trust = trust

    async def put_certificate(self, cert: SignedCertificate) -> bool:
        """Verify and persist. True when stored, False for a duplicate upload."""
        verified = verify_certificate(cert, self._trust)
        stored = await self._store.put(cert)
        log.info(
            "certd.put.%s aggregate=%s body_digest=%s org=%s",
            "stored" if stored else "duplicate",
            verified.body.software_digest.aggregate,
            verified.body_digest,
            verified.inspector_org,
        )
        return stored

    def get_certificates(self, aggregate: str) -> list[SignedCertificate]:
        if not _AGGREGATE_RE.match(aggregate):
            raise BadDigest(f"malformed aggregate digest {aggregate!r}")
        certs = self._store.get(aggregate)
        log.info("certd.get aggregate=%s found=%s", aggregate, len(certs))
        return certs
