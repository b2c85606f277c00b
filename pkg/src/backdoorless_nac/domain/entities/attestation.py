from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, RootModel

from backdoorless_nac.domain.entities.firmware import SoftwareDigest
from backdoorless_nac.domain.value_objects.hex_types import Digest, HexBytes, PublicKeyHex


class MeasurementEvent(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    digest: Digest


class MeasurementLog(RootModel[tuple[MeasurementEvent, ...]]):
    """Measurement events in boot order."""

    model_config = ConfigDict(frozen=True)

    @property
    def events(self) -> tuple[MeasurementEvent, ...]:
        return self.root

    def __len__(self) -> int:
        return len(self.root)


class AttestationQuote(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    pcr: Digest
    nonce: Digest
    log: MeasurementLog
    device_id: str
    signature: HexBytes

    def signed_payload(self) -> dict:
        return {
            "pcr": self.pcr,
            "nonce": self.nonce,
            "log": self.log,
            "device_id": self.device_id,
        }

    def to_message(self) -> dict:
        return {"type": "quote", **self.model_dump(mode="json")}


class DeviceRegistry(BaseModel):
    model_config = ConfigDict(frozen=True)

    devices: dict[str, PublicKeyHex] = Field(default_factory=dict)


class AttestationResult(BaseModel):
    """Outcome of the attestation half of an admission session."""

    model_config = ConfigDict(frozen=True)

    ok: bool
    device_id: str | None = None
    pcr: str | None = None
    quote_digest: str | None = None
    software_digest: SoftwareDigest | None = None
    error: str | None = None
    detail: str | None = None
