from __future__ import annotations

from typing import Any

import httpx
from pydantic import ValidationError

from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.domain.entities.certificate import CertificateLookup, SignedCertificate
from backdoorless_nac.errors import CertServerUnavailable, RemoteError

log = get_logger(__name__)


class CertServerClient:
    """Client for the certificate server HTTP interface."""

    def __init__(
        self, base_url: str, *, timeout: float = 5.0, client: httpx.AsyncClient | None = None
    ):
        self.base_url = base_url.rstrip("/")
        self.session = client or httpx.AsyncClient(timeout=timeout)

    async def request(self, method: str, path: str, **kwargs) -> httpx.Response:
        try:
            return await self.session.request(method, f"{self.base_url}{path}", **kwargs)
        except httpx.HTTPError as e:
            log.warning("certclient.request.failed method=%s path=%s error=%s", method, path, e)
            raise CertServerUnavailable(f"{method} {path}: {e}") from e

    async def put_certificate(self, cert: SignedCertificate) -> dict[str, Any]:
        resp = await self.request("PUT", "/v1/certificates", json=cert.model_dump(mode="json"))
        body = _json(resp)
        if resp.status_code not in (200, 201):
            raise RemoteError(
                str(body.get("error") or f"HTTP{resp.status_code}"),
                str(body.get("detail") or resp.text),
                http_status=resp.status_code,
            )
        log.info(
            "certclient.put status=%s body_digest=%s", resp.status_code, cert.body_digest
        )
        return {"status": resp.status_code, **body}

    async def get_certificates(self, aggregate: str) -> list[SignedCertificate]:
        resp = await self.request("GET", f"/v1/certificates/{aggregate}")
        if resp.status_code != 200:
            raise CertServerUnavailable(f"lookup answered HTTP {resp.status_code}")
        try:
            return [
                SignedCertificate.model_validate(c) for c in _json(resp).get("certificates", [])
            ]
        except (ValidationError, AttributeError, TypeError) as e:
            raise CertServerUnavailable(f"unreadable lookup answer: {e}") from e

    async def lookup(self, aggregate: str) -> CertificateLookup:
        """Like get_certificates but reports an unreachable server as a value."""
        try:
            certs = await self.get_certificates(aggregate)
        except CertServerUnavailable as e:
            return CertificateLookup(available=False, detail=e.message)
        return CertificateLookup(certificates=tuple(certs))

    async def aclose(self) -> None:
        await self.session.aclose()

    async def __aenter__(self) -> "CertServerClient":
        return self

    async def __aexit__(self, *exc) -> None:
        await self.aclose()


def _json(resp: httpx.Response) -> dict[str, Any]:
    try:
        body = resp.json()
    except ValueError:
        return {}
    return body if isinstance(body, dict) else {}
