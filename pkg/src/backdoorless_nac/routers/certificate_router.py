from __future__ import annotations

from fastapi import APIRouter, Request
from fastapi.responses import JSONResponse

from backdoorless_nac.domain.entities.certificate import SignedCertificate
from backdoorless_nac.services.certificate_service import CertificateService

router = APIRouter(prefix="/v1/certificates", tags=["certificates"])


def _service(request: Request) -> CertificateService:
    return request.app.state.certificate_service


@router.put("")
async def put_certificate(request: Request, body: SignedCertificate) -> JSONResponse:
    stored = await _service(request).put_certificate(body)
    return JSONResponse(
        status_code=201 if stored else 200,
        content={"stored": stored, "body_digest": body.body_digest},
    )


@router.get("/{aggregate}")
async def get_certificates(request: Request, aggregate: str) -> dict:
    certs = _service(request).get_certificates(aggregate)
    return {"certificates": [c.model_dump(mode="json") for c in certs]}
