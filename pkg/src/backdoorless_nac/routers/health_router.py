from __future__ import annotations

from fastapi import APIRouter

from backdoorless_nac.configs.settings import get_settings

router = APIRouter()


@router.get("/v1/healthz")
async def healthz() -> dict:
    settings = get_settings()
    return {"status": "ok", "service": settings.SERVICE_NAME, "environment": settings.ENVIRONMENT}
