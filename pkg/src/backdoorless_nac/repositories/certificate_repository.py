from __future__ import annotations

import asyncio
import json
import os
from pathlib import Path
from typing import BinaryIO

from pydantic import ValidationError

from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.core.canonical import canonical_encode
from backdoorless_nac.core.certificates import verify_certificate
from backdoorless_nac.domain.entities.certificate import SignedCertificate, TrustStore
from backdoorless_nac.errors import AppError, CorruptStore, StorageFailure

log = get_logger(__name__)


def _newest_first(cert: SignedCertificate) -> tuple[int, str]:
    return (-cert.body.issued_at, cert.body_digest)


def _fsync_dir(path: Path) -> None:
    try:
        fd = os.open(path, os.O_RDONLY)
    except OSError:
        return
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


class CertificateStore:
    """Certificates indexed by aggregate digest, backed by a JSON-lines journal.

    Writes are serialized and fsynced before `put` returns. Reads only see the
    in-memory index, which is updated after the record is durable.
    """

    def __init__(self, path: Path, trust: TrustStore):
        self._path = Path(path)
        self._trust = trust
        self._by_aggregate: dict[str, list[SignedCertificate]] = {}
        self._digests: set[str] = set()
        self._journal: BinaryIO | None = None
        self._lock = asyncio.Lock()

    @property
    def path(self) -> Path:
        return self._path

    @property
    def trust(self) -> TrustStore:
        return self._trust

    def __len__(self) -> int:
        return len(self._digests)

    # ----------------------------
    # Startup
    # ----------------------------

    def load(self) -> None:
        """Read the journal, verify every record, compact and reopen for appends."""
        records = self._read_journal()
        for cert in records:
            self._index(cert)
        self._compact()
        self._journal = open(self._path, "ab")
        log.info(
            "repo.cert.load path=%s records=%s certificates=%s aggregates=%s",
            self._path,
            len(records),
            len(self._digests),
            len(self._by_aggregate),
        )

    def _read_journal(self) -> list[SignedCertificate]:
        try:
            raw = self._path.read_bytes()
        except FileNotFoundError:
            return []
        except OSError as e:
            raise CorruptStore(f"cannot read store {self._path}: {e}") from e

        lines = raw.split(b"\n")
        torn = lines.pop() if lines else b""
        records = []
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            records.append(self._parse_record(line, lineno))
        if torn.strip():
            try:
                records.append(self._parse_record(torn, len(lines) + 1))
            except CorruptStore:
                log.warning(
                    "repo.cert.load torn_tail path=%s bytes=%s dropped", self._path, len(torn)
                )
        return records

    def _parse_record(self, line: bytes, lineno: int) -> SignedCertificate:
        try:
            cert = SignedCertificate.model_validate(json.loads(line))
            verify_certificate(cert, self._trust)
        except (json.JSONDecodeError, UnicodeDecodeError, ValidationError, AppError) as e:
            raise CorruptStore(f"{self._path}:{lineno}: {e}") from e
        return cert

    def _compact(self) -> None:
        tmp = self._path.with_name(self._path.name + ".tmp")
        try:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            with open(tmp, "wb") as f:
                for certs in self._by_aggregate.values():
                    for cert in sorted(certs, key=lambda c: c.body_digest):
                        f.write(canonical_encode(cert) + b"\n")
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, self._path)
            _fsync_dir(self._path.parent)
        except OSError as e:
            raise StorageFailure(f"cannot compact store {self._path}: {e}") from e

    def close(self) -> None:
        if self._journal is not None:
            self._journal.close()
            self._journal = None
            log.info("repo.cert.close path=%s", self._path)

    # ----------------------------
    # Reads and writes
    # ----------------------------

    def _index(self, cert: SignedCertificate) -> bool:
        if cert.body_digest in self._digests:
            return False
        self._digests.add(cert.body_digest)
        bucket = self._by_aggregate.setdefault(cert.body.software_digest.aggregate, [])
        bucket.append(cert)
        bucket.sort(key=_newest_first)
        return True

    def _append(self, record: bytes) -> None:
        if self._journal is None:
            raise StorageFailure("certificate store is not open")
        self._journal.write(record)
        self._journal.flush()
        os.fsync(self._journal.fileno())

    def contains(self, body_digest: str) -> bool:
        return body_digest in self._digests

    async def put(self, cert: SignedCertificate) -> bool:
        """Persist a verified certificate. Returns False for a duplicate."""
        async with self._lock:
            if cert.body_digest in self._digests:
                log.info("repo.cert.put duplicate body_digest=%s", cert.body_digest)
                return False
            try:
                await asyncio.to_thread(self._append, canonical_encode(cert) + b"\n")
            except OSError as e:
                log.error("repo.cert.put write_failed path=%s error=%s", self._path, e)
                raise StorageFailure(f"cannot append to {self._path}: {e}") from e
            self._index(cert)
        log.info(
            "repo.cert.put stored aggregate=%s body_digest=%s org=%s",
            cert.body.software_digest.aggregate,
            cert.body_digest,
            cert.body.inspector_org,
        )
        return True

    def get(self, aggregate: str) -> list[SignedCertificate]:
        return list(self._by_aggregate.get(aggregate, ()))

    def all(self) -> list[SignedCertificate]:
        return sorted(
            (c for certs in self._by_aggregate.values() for c in certs),
            key=lambda c: c.body_digest,
        )
