from __future__ import annotations

from enum import Enum
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ReasonCode(str, Enum):
    ATTESTATION = "ATTESTATION"
    NO_CERTIFICATE = "NO_CERTIFICATE"
    CERT_SERVER_UNAVAILABLE = "CERT_SERVER_UNAVAILABLE"
    COVERAGE = "COVERAGE"
    ALGORITHM = "ALGORITHM"
    BACKDOOR = "BACKDOOR"
    SUPPLIER = "SUPPLIER"
    ENGINEER = "ENGINEER"


class RequiredAlgorithm(BaseModel):
    model_config = ConfigDict(frozen=True)

    algorithm: str
    # subset match against the parameters recorded in the certificate
    parameters: dict[str, Any] = Field(default_factory=dict)


class ObligationTemplates(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_strict: float = 0.2
    t_lax: float = 0.9
    logging_level: str = "debug"
    vlan_quarantine: bool = False
    ip_allowlist: tuple[str, ...] | None = None
    minimal_permissions: bool = False

    @model_validator(mode="after")
    def _band(self) -> "ObligationTemplates":
        if not (0.0 < self.t_strict < self.t_lax <= 1.0):
            raise ValueError("monitoring band needs 0 < t_strict < t_lax <= 1")
        return self


class SecurityPolicy(BaseModel):
    model_config = ConfigDict(frozen=True)

    required_backdoor_types: frozenset[str] = frozenset()
    required_algorithms: tuple[RequiredAlgorithm, ...] = ()
    trusted_orgs: frozenset[str] = frozenset()
    trusted_suppliers: frozenset[str] | None = None
    deny_threshold: float = 0.8
    grey_threshold: float = 0.3
    obligation_templates: ObligationTemplates = Field(default_factory=ObligationTemplates)
    require_engineer_record: bool = False

    @model_validator(mode="after")
    def _thresholds(self) -> "SecurityPolicy":
        if not (0.0 < self.deny_threshold <= 1.0):
            raise ValueError("deny_threshold must lie in (0, 1]")
        if not (0.0 <= self.grey_threshold < self.deny_threshold):
            raise ValueError("grey_threshold must lie in [0, deny_threshold)")
        return self


class Monitoring(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["monitoring"] = "monitoring"
    anomaly_threshold: float = Field(gt=0.0, le=1.0)


class DetailedLogging(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["detailed-logging"] = "detailed-logging"
    level: str


class NetworkIsolation(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["network-isolation"] = "network-isolation"
    directive: Literal["vlan-quarantine", "ip-allowlist"]
    parameters: dict[str, Any] = Field(default_factory=dict)


class MinimalPermissions(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["minimal-permissions"] = "minimal-permissions"
    component: str


Obligation = Annotated[
    Union[Monitoring, DetailedLogging, NetworkIsolation, MinimalPermissions],
    Field(discriminator="kind"),
]


class PolicyOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: Literal["pass", "grey", "fail"]
    grey_score: float | None = None
    grey_components: tuple[str, ...] = ()
    reasons: tuple[ReasonCode, ...] = ()


class Evidence(BaseModel):
    model_config = ConfigDict(frozen=True)

    device_id: str | None = None
    quote_pcr: str | None = None
    quote_digest: str | None = None
    software_aggregate: str | None = None
    certificate_body_digest: str | None = None


class Decision(BaseModel):
    model_config = ConfigDict(frozen=True)

    outcome: Literal["Allow", "AllowWithObligations", "Deny"]
    reasons: tuple[ReasonCode, ...] = ()
    obligations: tuple[Obligation, ...] = ()
    evidence: Evidence = Field(default_factory=Evidence)

    @model_validator(mode="after")
    def _shape(self) -> "Decision":
        if self.outcome == "Deny" and not self.reasons:
            raise ValueError("Deny carries at least one reason code")
        if self.outcome == "AllowWithObligations" and not self.obligations:
            raise ValueError("AllowWithObligations carries at least one obligation")
        if self.outcome != "AllowWithObligations" and self.obligations:
            raise ValueError("obligations only accompany AllowWithObligations")
        return self

    def to_message(self) -> dict:
        return {"type": "decision", **self.model_dump(mode="json", exclude={"evidence"})}
