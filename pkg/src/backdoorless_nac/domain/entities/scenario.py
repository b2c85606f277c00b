from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from backdoorless_nac.domain.entities.firmware import Component, FirmwareBundle
from backdoorless_nac.domain.entities.inspection import (
    ControlFlowGraph,
    InspectionResources,
    SuiteItem,
)
from backdoorless_nac.domain.entities.policy import ReasonCode, SecurityPolicy
from backdoorless_nac.domain.value_objects.hex_types import HexBytes

CertPlan = Literal["none", "clean", "grey", "backdoor", "untrusted-org", "stale"]
Outcome = Literal["Allow", "AllowWithObligations", "Deny"]

DEFAULT_SUITE = (
    SuiteItem(algorithm="auth-bypass-reach@1"),
    SuiteItem(algorithm="static-compare-score@1"),
)


class ScenarioComponent(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    content_text: str | None = None
    content_hex: HexBytes | None = None
    supplier: str | None = None
    capabilities: frozenset[str] = frozenset()
    cfg: ControlFlowGraph | None = None

    @model_validator(mode="after")
    def _one_content(self) -> "ScenarioComponent":
        if (self.content_text is None) == (self.content_hex is None):
            raise ValueError(
                f"component {self.name!r} needs exactly one of content_text/content_hex"
            )
        return self

    def to_component(self) -> Component:
        content = (
            self.content_text.encode("utf-8")
            if self.content_text is not None
            else bytes.fromhex(self.content_hex)
        )
        return Component(
            name=self.name,
            content=content,
            cfg_sidecar=self.cfg,
            supplier=self.supplier,
            capabilities=self.capabilities,
        )


class ScenarioBundle(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    version: str
    device_class: str
    components: tuple[ScenarioComponent, ...]

    def to_bundle(self) -> FirmwareBundle:
        return FirmwareBundle(
            name=self.name,
            version=self.version,
            device_class=self.device_class,
            components=tuple(c.to_component() for c in self.components),
        )


class ScenarioDevice(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    bundle: ScenarioBundle
    tamper: Literal["log", "nonce", "key"] | None = None
    cert_plan: CertPlan = "none"


class ExpectedDecision(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    outcome: Outcome
    # compared as a set when given
    reasons: tuple[ReasonCode, ...] | None = None


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    seed: int
    base_time: int = Field(default=1_700_000_000, ge=0)
    suite: tuple[SuiteItem, ...] = DEFAULT_SUITE
    resources: InspectionResources = Field(default_factory=InspectionResources)
    policy: SecurityPolicy
    devices: tuple[ScenarioDevice, ...]
    expected: tuple[ExpectedDecision, ...]

    @model_validator(mode="after")
    def _shape(self) -> "Scenario":
        if len(self.expected) != len(self.devices):
            raise ValueError("expected must list one decision per device")
        names = [d.name for d in self.devices]
        if len(names) != len(set(names)):
            raise ValueError("device names must be unique")
        return self


class ActualDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    outcome: str
    reasons: tuple[str, ...] = ()
    obligations: tuple[str, ...] = ()


class DeviceResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    device: str
    expected: ExpectedDecision
    actual: ActualDecision
    passed: bool = Field(serialization_alias="pass")


class ScenarioReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario: str
    results: tuple[DeviceResult, ...]
    passed: bool = Field(serialization_alias="pass")

    def to_document(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)
