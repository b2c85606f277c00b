from __future__ import annotations

import secrets
import threading
import time
from collections.abc import Callable

from backdoorless_nac.configs.logging_config import get_logger

log = get_logger(__name__)

NONCE_TTL_SECONDS = 300  # 5 minutes


class NonceCache:
    """Single-use challenge nonces with expiry; safe across concurrent sessions."""

    def __init__(
        self,
        ttl_seconds: float = NONCE_TTL_SECONDS,
        clock: Callable[[], float] = time.monotonic,
    ):
        self._ttl = ttl_seconds
        self._clock = clock
        self._outstanding: dict[bytes, float] = {}
        self._lock = threading.Lock()

    def issue(self) -> bytes:
        nonce = secrets.token_bytes(32)
        with self._lock:
            self._prune()
            self._outstanding[nonce] = self._clock() + self._ttl
        return nonce

    def consume(self, nonce: bytes) -> bool:
        with self._lock:
            self._prune()
            return self._outstanding.pop(nonce, None) is not None

    def __len__(self) -> int:
        with self._lock:
            self._prune()
            return len(self._outstanding)

    def _prune(self) -> None:
        now = self._clock()
        expired = [n for n, deadline in self._outstanding.items() if deadline <= now]
        for n in expired:
            del self._outstanding[n]
        if expired:
            log.debug("nonce.prune expired=%s", len(expired))
