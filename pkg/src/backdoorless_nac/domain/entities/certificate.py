from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator

from backdoorless_nac.domain.entities.firmware import SoftwareDigest
from backdoorless_nac.domain.entities.inspection import InspectionEntry
from backdoorless_nac.domain.value_objects.hex_types import Digest, HexBytes, PublicKeyHex

BACKDOOR_TYPES = frozenset(
    {"auth-bypass", "hidden-credential", "hidden-functionality", "known-vulnerability"}
)


class CertificateBody(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    software_digest: SoftwareDigest
    bundle_name: str
    bundle_version: str
    device_class: str
    inspection_entries: tuple[InspectionEntry, ...] = ()
    covered_backdoor_types: frozenset[str] = frozenset()
    inspector_org: str
    engineer: str | None = None
    supply_chain: tuple[tuple[str, str], ...] | None = None
    issued_at: int = Field(ge=0)
    supersedes: Digest | None = None

    @model_validator(mode="after")
    def _consistent(self) -> "CertificateBody":
        claimed: set[str] = set()
        for e in self.inspection_entries:
            claimed |= e.backdoor_types
        if set(self.covered_backdoor_types) != claimed:
            raise ValueError("covered_backdoor_types must equal the union over inspection entries")
        if self.supply_chain is not None:
            names = {name for name, _ in self.software_digest.component_digests}
            unknown = [c for c, _ in self.supply_chain if c not in names]
            if unknown:
                raise ValueError(f"supply_chain references unknown components: {unknown}")
        return self


class SignedCertificate(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    body: CertificateBody
    body_digest: Digest
    signature: HexBytes
    signer_key_id: str


class VerifiedCertificate(BaseModel):
    model_config = ConfigDict(frozen=True)

    body: CertificateBody
    body_digest: Digest
    inspector_org: str
    signer_key_id: str


class TrustedKey(BaseModel):
    model_config = ConfigDict(frozen=True)

    key_id: str
    public_key_hex: PublicKeyHex


class TrustStore(BaseModel):
    model_config = ConfigDict(frozen=True)

    organizations: dict[str, tuple[TrustedKey, ...]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _unique_key_ids(self) -> "TrustStore":
        for org, keys in self.organizations.items():
            ids = [k.key_id for k in keys]
            if len(ids) != len(set(ids)):
                raise ValueError(f"duplicate key_id for organization {org}")
        return self

    def public_key(self, org: str, key_id: str) -> str | None:
        for k in self.organizations.get(org, ()):
            if k.key_id == key_id:
                return k.public_key_hex
        return None


class IssueOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    include_supply_chain: bool = False
    engineer: str | None = None
    supersedes: Digest | None = None
    # defaults to the current time
    issued_at: int | None = Field(default=None, ge=0)


class CertificateLookup(BaseModel):
    """What the verifier got back from the certificate server for one aggregate."""

    model_config = ConfigDict(frozen=True)

    certificates: tuple[SignedCertificate, ...] = ()
    available: bool = True
    detail: str | None = None
