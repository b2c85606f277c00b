from __future__ import annotations

from collections.abc import Iterable, Mapping

from backdoorless_nac.domain.entities.firmware import Component, FirmwareBundle
from backdoorless_nac.domain.entities.inspection import AdvisoryDb, DeviceClassProfile, Finding
from backdoorless_nac.inspection.errors import BadParameters, ProfileMismatch

BUNDLE_SCOPE = "*"


def scan_credentials(
    component: Component, patterns: Iterable[bytes]
) -> tuple[float, list[Finding]]:
    patterns = list(patterns)
    if not patterns:
        raise BadParameters("credential scan needs at least one pattern")
    findings = []
    for pattern in patterns:
        if not pattern:
            raise BadParameters("empty credential pattern")
        offset = component.content.find(pattern)
        while offset != -1:
            findings.append(
                Finding(
                    component=component.name,
                    location=f"offset:{offset}",
                    kind="hidden-credential",
                    detail=f"credential pattern {pattern.hex()} matched",
                    weight=1.0,
                )
            )
            offset = component.content.find(pattern, offset + 1)
    return (1.0 if findings else 0.0), findings


def extract_capabilities(
    bundle: FirmwareBundle, markers: Mapping[str, bytes]
) -> dict[str, frozenset[str]]:
    """Declared capabilities plus those whose byte marker occurs in the content."""
    out = {}
    for c in bundle.components:
        detected = {cap for cap, marker in markers.items() if marker and marker in c.content}
        out[c.name] = frozenset(c.capabilities) | frozenset(detected)
    return out


def profile_deviation(
    bundle: FirmwareBundle,
    capabilities: Mapping[str, frozenset[str]],
    profile: DeviceClassProfile,
    deviation_weight: float = 0.5,
) -> tuple[float, list[Finding]]:
    if profile.class_name != bundle.device_class:
        raise ProfileMismatch(
            f"profile {profile.class_name!r} does not apply to class {bundle.device_class!r}"
        )
    exposing: dict[str, list[str]] = {}
    for name in bundle.component_names:
        for cap in sorted(capabilities.get(name, ())):
            exposing.setdefault(cap, []).append(name)

    findings = []
    deviations = sorted(set(exposing) & profile.forbidden_capabilities)
    for cap in deviations:
        findings.append(
            Finding(
                component=exposing[cap][0],
                location=f"capability:{cap}",
                kind="hidden-functionality",
                detail=(
                    f"capability {cap!r} is forbidden for {profile.class_name}; "
                    f"exposed by {', '.join(exposing[cap])}"
                ),
                weight=deviation_weight,
            )
        )
    for cap in sorted(profile.expected_capabilities - set(exposing)):
        findings.append(
            Finding(
                component=BUNDLE_SCOPE,
                location=f"capability:{cap}",
                kind="missing-capability",
                detail=f"expected capability {cap!r} not observed",
                weight=0.0,
            )
        )
    return min(1.0, deviation_weight * len(deviations)), findings


def component_advisories(component: Component, db: AdvisoryDb) -> list[Finding]:
    digest = component.content_digest
    return [
        Finding(
            component=component.name,
            location=f"digest:{digest}",
            kind="known-vulnerability",
            detail=f"advisory {advisory}",
            weight=1.0,
        )
        for advisory in db.advisories.get(digest, ())
    ]


def vuln_lookup(bundle: FirmwareBundle, db: AdvisoryDb) -> tuple[float, list[Finding]]:
    findings = [f for c in bundle.components for f in component_advisories(c, db)]
    return (1.0 if findings else 0.0), findings
