from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from backdoorless_nac.attestation.measurement import measure_boot
from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.core.loaders import load_bundle, load_device_identity
from backdoorless_nac.domain.entities.attestation import MeasurementLog
from backdoorless_nac.domain.entities.firmware import FirmwareBundle

log = get_logger(__name__)


@dataclass(frozen=True)
class ProverState:
    bundle: FirmwareBundle
    device_id: str
    device_key: Ed25519PrivateKey
    log: MeasurementLog | None = None
    pcr: bytes | None = None

    @property
    def booted(self) -> bool:
        return self.log is not None and self.pcr is not None


def boot_bundle(
    bundle: FirmwareBundle, device_id: str, device_key: Ed25519PrivateKey
) -> ProverState:
    measurement, pcr = measure_boot(bundle)
    log.info(
        "prover.boot device_id=%s bundle=%s version=%s events=%s pcr=%s",
        device_id,
        bundle.name,
        bundle.version,
        len(measurement),
        pcr.hex(),
    )
    return ProverState(
        bundle=bundle, device_id=device_id, device_key=device_key, log=measurement, pcr=pcr
    )


def boot(bundle_path: Path, identity_path: Path, *, inline: bool = False) -> ProverState:
    bundle = load_bundle(bundle_path, inline=inline)
    identity = load_device_identity(identity_path)
    return boot_bundle(bundle, identity.device_id, identity.private_key())
