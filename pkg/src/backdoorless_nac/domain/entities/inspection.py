from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from backdoorless_nac.domain.value_objects.hex_types import Digest, HexBytes

NodeLabel = Literal["entry", "auth-check", "privileged"]
Verdict = Literal["clean", "grey", "backdoor-found"]

# canonical scalars recorded verbatim in certificates
ParamValue = str | int | float | bool | None

GREY_CUT = 0.3
BACKDOOR_CUT = 0.8


class CfgNode(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str
    labels: frozenset[NodeLabel] = frozenset()


class StaticCompare(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    node: str
    literal_hex: HexBytes


class ControlFlowGraph(BaseModel):
    """Control-flow sidecar of a component; checked by `inspection.cfg_analysis.validate_graph`."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    nodes: tuple[CfgNode, ...]
    edges: tuple[tuple[str, str], ...] = ()
    static_compares: tuple[StaticCompare, ...] = ()


class Finding(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    component: str
    location: str
    kind: str
    detail: str
    weight: float = Field(ge=0.0, le=1.0)


class DeviceClassProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    class_name: str
    expected_capabilities: frozenset[str] = frozenset()
    forbidden_capabilities: frozenset[str] = frozenset()

    @model_validator(mode="after")
    def _disjoint(self) -> "DeviceClassProfile":
        overlap = self.expected_capabilities & self.forbidden_capabilities
        if overlap:
            raise ValueError(f"capabilities both expected and forbidden: {sorted(overlap)}")
        return self


class AdvisoryDb(BaseModel):
    model_config = ConfigDict(frozen=True)

    advisories: dict[Digest, tuple[str, ...]] = Field(default_factory=dict)


class InspectionResources(BaseModel):
    """Databases the detectors consult; fingerprinted into recorded parameters."""

    model_config = ConfigDict(frozen=True)

    credential_patterns: tuple[HexBytes, ...] = ()
    profiles: tuple[DeviceClassProfile, ...] = ()
    advisories: AdvisoryDb = Field(default_factory=AdvisoryDb)
    capability_markers: dict[str, HexBytes] = Field(default_factory=dict)

    def profile_for(self, device_class: str) -> DeviceClassProfile | None:
        for p in self.profiles:
            if p.class_name == device_class:
                return p
        return None


def verdict_for(
    score: float, grey_cut: float = GREY_CUT, backdoor_cut: float = BACKDOOR_CUT
) -> Verdict:
    if score >= backdoor_cut:
        return "backdoor-found"
    if score >= grey_cut:
        return "grey"
    return "clean"


class InspectionEntry(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    algorithm: str
    parameters: dict[str, ParamValue] = Field(default_factory=dict)
    backdoor_types: frozenset[str]
    component_scope: tuple[str, ...]
    score: float = Field(ge=0.0, le=1.0)
    verdict: Verdict
    findings: tuple[Finding, ...] = ()
    subject_digest: Digest
    carried_forward: tuple[str, ...] = ()

    @model_validator(mode="after")
    def _verdict_matches_score(self) -> "InspectionEntry":
        grey_cut = self.parameters.get("grey_cut", GREY_CUT)
        backdoor_cut = self.parameters.get("backdoor_cut", BACKDOOR_CUT)
        expected = verdict_for(self.score, float(grey_cut), float(backdoor_cut))
        if self.verdict != expected:
            raise ValueError(f"verdict {self.verdict} inconsistent with score {self.score}")
        return self


class SuiteItem(BaseModel):
    model_config = ConfigDict(frozen=True)

    algorithm: str
    parameters: dict[str, Any] = Field(default_factory=dict)

    @field_validator("algorithm")
    @classmethod
    def _non_empty(cls, v: str) -> str:
        if not v:
            raise ValueError("algorithm id missing")
        return v
