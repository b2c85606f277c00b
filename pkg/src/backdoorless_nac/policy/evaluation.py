"""Admission decision: certificate selection, policy checks and obligations."""
from __future__ import annotations

from collections.abc import Iterable, Sequence

from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.core.certificates import verify_certificate
from backdoorless_nac.domain.entities.attestation import AttestationResult
from backdoorless_nac.domain.entities.certificate import (
    CertificateBody,
    CertificateLookup,
    SignedCertificate,
    TrustStore,
    VerifiedCertificate,
)
from backdoorless_nac.domain.entities.inspection import InspectionEntry
from backdoorless_nac.domain.entities.policy import (
    Decision,
    DetailedLogging,
    Evidence,
    MinimalPermissions,
    Monitoring,
    NetworkIsolation,
    Obligation,
    PolicyOutcome,
    ReasonCode,
    RequiredAlgorithm,
    SecurityPolicy,
)
from backdoorless_nac.errors import InvalidSignature, UnknownSigner
from backdoorless_nac.policy.errors import OutOfBand

log = get_logger(__name__)


def select_certificate(
    certs: Iterable[SignedCertificate], policy: SecurityPolicy, trust: TrustStore
) -> VerifiedCertificate | None:
    survivors: list[VerifiedCertificate] = []
    for cert in certs:
        try:
            verified = verify_certificate(cert, trust)
        except (InvalidSignature, UnknownSigner) as e:
            log.info("policy.select.skip body_digest=%s reason=%s", cert.body_digest, e.error_code)
            continue
        if verified.inspector_org not in policy.trusted_orgs:
            log.info(
                "policy.select.untrusted org=%s body_digest=%s",
                verified.inspector_org,
                verified.body_digest,
            )
            continue
        survivors.append(verified)

    # only a trusted certificate can retire another one
    superseded = {v.body.supersedes for v in survivors if v.body.supersedes}
    current = [v for v in survivors if v.body_digest not in superseded]
    if not current:
        return None
    current.sort(key=lambda v: (-v.body.issued_at, v.body_digest))
    return current[0]


def _params_match(entry: InspectionEntry, required: RequiredAlgorithm) -> bool:
    return all(
        k in entry.parameters and entry.parameters[k] == v for k, v in required.parameters.items()
    )


def _supplier_ok(body: CertificateBody, trusted: frozenset[str]) -> bool:
    if body.supply_chain is None:
        return False
    suppliers = dict(body.supply_chain)
    return all(suppliers.get(name) in trusted for name, _ in body.software_digest.component_digests)


def evaluate_policy(body: CertificateBody, policy: SecurityPolicy) -> PolicyOutcome:
    reasons: list[ReasonCode] = []

    if not policy.required_backdoor_types <= body.covered_backdoor_types:
        reasons.append(ReasonCode.COVERAGE)

    for required in policy.required_algorithms:
        if not any(
            e.algorithm == required.algorithm and _params_match(e, required)
            for e in body.inspection_entries
        ):
            reasons.append(ReasonCode.ALGORITHM)
            break

    if any(
        e.verdict == "backdoor-found" or e.score >= policy.deny_threshold
        for e in body.inspection_entries
    ):
        reasons.append(ReasonCode.BACKDOOR)

    if policy.trusted_suppliers is not None and not _supplier_ok(body, policy.trusted_suppliers):
        reasons.append(ReasonCode.SUPPLIER)

    if policy.require_engineer_record and not body.engineer:
        reasons.append(ReasonCode.ENGINEER)

    if reasons:
        return PolicyOutcome(status="fail", reasons=tuple(reasons))

    grey_entries = [
        e
        for e in body.inspection_entries
        if policy.grey_threshold <= e.score < policy.deny_threshold
    ]
    if not grey_entries:
        return PolicyOutcome(status="pass")

    components = sorted(
        {
            f.component
            for e in grey_entries
            for f in e.findings
            if f.weight > 0 and f.component != "*"
        }
    )
    return PolicyOutcome(
        status="grey",
        grey_score=max(e.score for e in grey_entries),
        grey_components=tuple(components),
    )


def derive_obligations(
    grey_score: float, policy: SecurityPolicy, grey_components: Sequence[str] = ()
) -> list[Obligation]:
    low, high = policy.grey_threshold, policy.deny_threshold
    if not (low <= grey_score < high):
        raise OutOfBand(grey_score, low, high)

    t = policy.obligation_templates
    threshold = t.t_lax - (t.t_lax - t.t_strict) * (grey_score - low) / (high - low)

    obligations: list[Obligation] = [
        Monitoring(anomaly_threshold=threshold),
        DetailedLogging(level=t.logging_level),
    ]
    if t.vlan_quarantine:
        obligations.append(NetworkIsolation(directive="vlan-quarantine"))
    if t.ip_allowlist is not None:
        obligations.append(
            NetworkIsolation(directive="ip-allowlist", parameters={"allow": list(t.ip_allowlist)})
        )
    if t.minimal_permissions:
        obligations.extend(MinimalPermissions(component=c) for c in grey_components)
    return obligations


def _deny(reasons: Sequence[ReasonCode], evidence: Evidence) -> Decision:
    return Decision(outcome="Deny", reasons=tuple(reasons), evidence=evidence)


def evaluate_admission(
    attestation: AttestationResult,
    lookup: CertificateLookup | None,
    policy: SecurityPolicy,
    trust: TrustStore,
) -> Decision:
    """Fail-closed: Allow needs attestation, a trusted certificate and a passing policy."""
    evidence = Evidence(
        device_id=attestation.device_id,
        quote_pcr=attestation.pcr,
        quote_digest=attestation.quote_digest,
        software_aggregate=(
            attestation.software_digest.aggregate if attestation.software_digest else None
        ),
    )

    if not attestation.ok or attestation.software_digest is None:
        return _deny([ReasonCode.ATTESTATION], evidence)

    if lookup is None or not lookup.available:
        return _deny([ReasonCode.CERT_SERVER_UNAVAILABLE], evidence)

    aggregate = attestation.software_digest.aggregate
    matching = [
        c for c in lookup.certificates if c.body.software_digest.aggregate == aggregate
    ]
    selected = select_certificate(matching, policy, trust)
    if selected is None:
        return _deny([ReasonCode.NO_CERTIFICATE], evidence)

    evidence = evidence.model_copy(update={"certificate_body_digest": selected.body_digest})
    outcome = evaluate_policy(selected.body, policy)
    if outcome.status == "fail":
        return _deny(outcome.reasons, evidence)
    if outcome.status == "grey":
        obligations = derive_obligations(outcome.grey_score, policy, outcome.grey_components)
        return Decision(
            outcome="AllowWithObligations", obligations=tuple(obligations), evidence=evidence
        )
    return Decision(outcome="Allow", evidence=evidence)
