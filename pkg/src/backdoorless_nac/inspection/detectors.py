from __future__ import annotations

from collections.abc import Mapping

from backdoorless_nac.core.canonical import digest_of
from backdoorless_nac.domain.entities.firmware import Component, FirmwareBundle
from backdoorless_nac.domain.entities.inspection import Finding, InspectionResources, ParamValue
from backdoorless_nac.inspection.cfg_analysis import detect_auth_bypass, score_static_compares
from backdoorless_nac.inspection.detector import Detector
from backdoorless_nac.inspection.errors import BadParameters, ProfileMismatch
from backdoorless_nac.inspection.scanners import (
    component_advisories,
    extract_capabilities,
    profile_deviation,
    scan_credentials,
)


class AuthBypassReachDetector(Detector):
    algorithm = "auth-bypass-reach@1"
    backdoor_types = frozenset({"auth-bypass"})

    def _inspect_component(self, component, resources, params) -> list[Finding]:
        if component.cfg_sidecar is None:
            return []
        _, findings = detect_auth_bypass(component.cfg_sidecar, component.name)
        return findings


class StaticCompareScoreDetector(Detector):
    algorithm = "static-compare-score@1"
    backdoor_types = frozenset({"hidden-credential", "hidden-functionality"})
    defaults = {"min_literal_length": 0}

    def _validate(self, params, resources) -> None:
        if int(params["min_literal_length"]) < 0:
            raise BadParameters(f"{self.algorithm}: min_literal_length must be >= 0")

    def _inspect_component(self, component, resources, params) -> list[Finding]:
        if component.cfg_sidecar is None:
            return []
        _, findings = score_static_compares(
            component.cfg_sidecar, component.name, int(params["min_literal_length"])
        )
        return findings


class CredentialScanDetector(Detector):
    algorithm = "credential-scan@1"
    backdoor_types = frozenset({"hidden-credential"})

    def _fingerprints(self, resources: InspectionResources) -> dict[str, ParamValue]:
        return {"pattern_set": digest_of(list(resources.credential_patterns))}

    def _validate(self, params, resources) -> None:
        if not resources.credential_patterns:
            raise BadParameters(f"{self.algorithm}: no credential patterns configured")

    def _inspect_component(self, component: Component, resources, params) -> list[Finding]:
        patterns = [bytes.fromhex(p) for p in resources.credential_patterns]
        _, findings = scan_credentials(component, patterns)
        return findings


class ProfileDeviationDetector(Detector):
    algorithm = "profile-deviation@1"
    backdoor_types = frozenset({"hidden-functionality"})
    component_local = False
    defaults = {"deviation_weight": 0.5}

    def _fingerprints(self, resources: InspectionResources) -> dict[str, ParamValue]:
        return {
            "profile_set": digest_of(list(resources.profiles)),
            "marker_set": digest_of(resources.capability_markers),
        }

    def _validate(self, params, resources) -> None:
        if not (0.0 < float(params["deviation_weight"]) <= 1.0):
            raise BadParameters(f"{self.algorithm}: deviation_weight must lie in (0, 1]")

    def _inspect_bundle(self, bundle: FirmwareBundle, resources, params) -> list[Finding]:
        profile = resources.profile_for(bundle.device_class)
        if profile is None:
            raise ProfileMismatch(f"no profile for device class {bundle.device_class!r}")
        markers = {cap: bytes.fromhex(m) for cap, m in resources.capability_markers.items()}
        capabilities = extract_capabilities(bundle, markers)
        _, findings = profile_deviation(
            bundle, capabilities, profile, float(params["deviation_weight"])
        )
        return findings

    def score(self, findings, params: Mapping[str, ParamValue]) -> float:
        deviations = sum(1 for f in findings if f.kind == "hidden-functionality")
        return min(1.0, float(params["deviation_weight"]) * deviations)


class VulnLookupDetector(Detector):
    algorithm = "vuln-lookup@1"
    backdoor_types = frozenset({"known-vulnerability"})

    def _fingerprints(self, resources: InspectionResources) -> dict[str, ParamValue]:
        return {"advisory_set": digest_of(resources.advisories)}

    def _inspect_component(self, component: Component, resources, params) -> list[Finding]:
        return component_advisories(component, resources.advisories)
