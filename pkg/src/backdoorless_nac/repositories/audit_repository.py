from __future__ import annotations

import asyncio
import json
import os
from pathlib import Path
from typing import Any

from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.domain.entities.policy import Decision
from backdoorless_nac.errors import StorageFailure
from backdoorless_nac.utils.time_utils import iso_seconds, now_seconds

log = get_logger(__name__)


def audit_record(decision: Decision, timestamp: int) -> dict[str, Any]:
    evidence = decision.evidence
    return {
        "timestamp": iso_seconds(timestamp),
        "device_id": evidence.device_id,
        "outcome": decision.outcome,
        "reasons": [r.value for r in decision.reasons],
        "obligations": [o.model_dump(mode="json") for o in decision.obligations],
        "quote_pcr": evidence.quote_pcr,
        "certificate_body_digest": evidence.certificate_body_digest,
    }


class AuditLog:
    """Append-only JSON-lines decision log."""

    def __init__(self, path: Path):
        self._path = Path(path)
        self._lock = asyncio.Lock()

    @property
    def path(self) -> Path:
        return self._path

    def _write(self, line: bytes) -> None:
        self._path.parent.mkdir(parents=True, exist_ok=True)
        with open(self._path, "ab") as f:
            f.write(line)
            f.flush()
            os.fsync(f.fileno())

    async def append(self, decision: Decision, timestamp: int | None = None) -> dict[str, Any]:
        record = audit_record(decision, now_seconds() if timestamp is None else timestamp)
        line = json.dumps(record, sort_keys=True, separators=(",", ":")).encode("utf-8") + b"\n"
        async with self._lock:
            try:
                await asyncio.to_thread(self._write, line)
            except OSError as e:
                log.error("repo.audit.append write_failed path=%s error=%s", self._path, e)
                raise StorageFailure(f"cannot append to audit log {self._path}: {e}") from e
        log.info(
            "repo.audit.append device_id=%s outcome=%s reasons=%s",
            record["device_id"],
            record["outcome"],
            record["reasons"],
        )
        return record

    def read_all(self) -> list[dict[str, Any]]:
        try:
            text = self._path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return []
        return [json.loads(line) for line in text.splitlines() if line.strip()]
