"""Simulated measured boot: a single SHA-256 register extended per component."""
from __future__ import annotations

from backdoorless_nac.attestation.errors import MalformedLog
from backdoorless_nac.core.canonical import ZERO_DIGEST, sha256
from backdoorless_nac.core.hashing import digest_components
from backdoorless_nac.domain.entities.attestation import MeasurementEvent, MeasurementLog
from backdoorless_nac.domain.entities.firmware import FirmwareBundle, SoftwareDigest
from backdoorless_nac.errors import DuplicateComponentName, EmptyBundle


def extend_register(pcr: bytes, event_digest: bytes) -> bytes:
    return sha256(pcr + event_digest)


def replay_log(log: MeasurementLog) -> bytes:
    pcr = ZERO_DIGEST
    for event in log.events:
        pcr = extend_register(pcr, bytes.fromhex(event.digest))
    return pcr


def measure_boot(bundle: FirmwareBundle) -> tuple[MeasurementLog, bytes]:
    if not bundle.components:
        raise EmptyBundle()
    log = MeasurementLog(
        tuple(MeasurementEvent(name=c.name, digest=c.content_digest) for c in bundle.components)
    )
    return log, replay_log(log)


def software_digest_from_log(log: MeasurementLog) -> SoftwareDigest:
    """Certificate lookup key rebuilt from the events with the hash_bundle rules."""
    try:
        return digest_components((e.name, e.digest) for e in log.events)
    except DuplicateComponentName as e:
        raise MalformedLog(f"component {e.name!r} measured twice") from e
