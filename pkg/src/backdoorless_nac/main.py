from __future__ import annotations

import asyncio
import socket
import time
from collections.abc import AsyncIterator
from contextlib import asynccontextmanager

import uvicorn
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from backdoorless_nac import __version__
from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.configs.settings import CertServerSettings, get_settings, parse_listen
from backdoorless_nac.core.loaders import load_trust_store
from backdoorless_nac.errors import AppError, BindFailure
from backdoorless_nac.repositories.certificate_repository import CertificateStore
from backdoorless_nac.routers.certificate_router import router as certificate_router
from backdoorless_nac.routers.health_router import router as health_router
from backdoorless_nac.services.certificate_service import CertificateService
from backdoorless_nac.utils.response import failure

log = get_logger(__name__)


def create_app(
    settings: CertServerSettings | None = None, store: CertificateStore | None = None
) -> FastAPI:
    """Certificate server app. An injected store is used as is and left open on shutdown."""
    app = FastAPI(title=f"{get_settings().SERVICE_NAME} certificate server", version=__version__)
    settings = settings or CertServerSettings()
    app.state.settings = settings
    app.state.owns_store = store is None
    if store is not None:
        app.state.store = store
        app.state.certificate_service = CertificateService(store, store.trust)

    @app.middleware("http")
    async def request_logging_middleware(request: Request, call_next):
        start = time.perf_counter()
        method = request.method
        path = request.url.path
        request_id = request.headers.get("x-request-id")

        log.info("request.start method=%s path=%s request_id=%s", method, path, request_id)
        response = None
        try:
            response = await call_next(request)
        finally:
            elapsed_ms = int((time.perf_counter() - start) * 1000)
            log.info(
                "request.end method=%s path=%s status=%s request_id=%s elapsed_ms=%s",
                method,
                path,
                getattr(response, "status_code", "unknown"),
                request_id,
                elapsed_ms,
            )
        return response

    app.include_router(health_router)
    app.include_router(certificate_router)

    @app.exception_handler(AppError)
    async def app_error_handler(_: Request, exc: AppError) -> JSONResponse:
        log.info(
            "request.error type=app_error status=%s error=%s message=%s",
            exc.http_status,
            exc.error_code,
            exc.message,
        )
        return JSONResponse(
            status_code=exc.http_status, content=failure(exc.error_code, exc.message)
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(_: Request, exc: RequestValidationError) -> JSONResponse:
        errors = exc.errors()
        detail = errors[0].get("msg", "invalid request") if errors else "invalid request"
        log.info("request.error type=validation detail=%s", detail)
        return JSONResponse(status_code=422, content=failure("ParseError", str(detail)))

    @app.exception_handler(Exception)
    async def unhandled_error_handler(_: Request, exc: Exception) -> JSONResponse:
        log.exception("Unhandled error: %s", str(exc))
        return JSONResponse(
            status_code=500, content=failure("InternalError", "internal server error")
        )

    @app.on_event("startup")
    async def startup() -> None:
        if getattr(app.state, "store", None) is None:
            trust = load_trust_store(settings.trust_store_path)
            owned = CertificateStore(settings.store_path, trust)
            owned.load()
            app.state.store = owned
            app.state.certificate_service = CertificateService(owned, trust)
        store = app.state.store
        log.info("startup.done store=%s certificates=%s", store.path, len(store))

    @app.on_event("shutdown")
    async def shutdown() -> None:
        log.info("shutdown.begin")
        if app.state.owns_store and getattr(app.state, "store", None) is not None:
            app.state.store.close()
        log.info("shutdown.done")

    return app


def bind_socket(host: str, port: int) -> socket.socket:
    family = socket.AF_INET6 if ":" in host else socket.AF_INET
    sock = socket.socket(family, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
        sock.listen(128)
    except OSError as e:
        sock.close()
        raise BindFailure(f"cannot listen on {host}:{port}: {e.strerror or e}") from e
    sock.setblocking(False)
    return sock


def _uvicorn_config(app: FastAPI) -> uvicorn.Config:
    # logging is configured by setup_logging
    return uvicorn.Config(app, log_config=None, access_log=False, lifespan="on")


def serve(settings: CertServerSettings) -> None:
    """Run the certificate server until interrupted.

    The store is loaded before the socket is bound, so a corrupt journal
    refuses startup without ever listening.
    """
    host, port = parse_listen(settings.listen)
    trust = load_trust_store(settings.trust_store_path)
    store = CertificateStore(settings.store_path, trust)
    store.load()
    try:
        sock = bind_socket(host, port)
        log.info("certd.serve listen=%s:%s store=%s", host, port, settings.store_path)
        server = uvicorn.Server(_uvicorn_config(create_app(settings, store)))
        server.run(sockets=[sock])
    finally:
        store.close()


@asynccontextmanager
async def start_in_process(
    store: CertificateStore, host: str = "127.0.0.1"
) -> AsyncIterator[str]:
    """Serve `store` on an ephemeral port inside the running loop; yields the base URL."""
    sock = bind_socket(host, 0)
    port = sock.getsockname()[1]
    server = uvicorn.Server(_uvicorn_config(create_app(store=store)))
    task = asyncio.create_task(server.serve(sockets=[sock]))
    try:
        while not server.started:
            if task.done():
                task.result()
                raise BindFailure(f"in-process server on {host}:{port} exited during startup")
            await asyncio.sleep(0.01)
        log.info("certd.in_process.started url=http://%s:%s", host, port)
        yield f"http://{host}:{port}"
    finally:
        server.should_exit = True
        await task
        sock.close()

