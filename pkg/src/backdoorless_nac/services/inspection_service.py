from __future__ import annotations

from collections.abc import Iterable, Sequence

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.core.certificates import sign_certificate
from backdoorless_nac.core.hashing import hash_bundle
from backdoorless_nac.domain.entities.certificate import (
    CertificateBody,
    IssueOptions,
    SignedCertificate,
)
from backdoorless_nac.domain.entities.firmware import FirmwareBundle
from backdoorless_nac.domain.entities.inspection import (
    InspectionEntry,
    InspectionResources,
    SuiteItem,
)
from backdoorless_nac.errors import DigestMismatch
from backdoorless_nac.inspection.registry import DetectorRegistry
from backdoorless_nac.utils.time_utils import now_seconds

log = get_logger(__name__)


def _check_subject(entries: Iterable[InspectionEntry], aggregate: str, what: str) -> None:
    for e in entries:
        if e.subject_digest != aggregate:
            raise DigestMismatch(
                f"{what}: entry {e.algorithm} was produced for {e.subject_digest}, not {aggregate}"
            )


class InspectionService:
    """Runs detector suites, issues certificates, re-inspects updated bundles.

    `executions` counts detector invocations: one per component for
    component-local detectors, one per bundle for bundle-global ones.
    """

    def __init__(
        self,
        registry: DetectorRegistry | None = None,
        resources: InspectionResources | None = None,
    ):
        self._registry = registry or DetectorRegistry()
        self._resources = resources or InspectionResources()
        self.executions = 0

    def run_inspection(
        self, bundle: FirmwareBundle, suite: Sequence[SuiteItem]
    ) -> list[InspectionEntry]:
        aggregate = hash_bundle(bundle).aggregate
        log.info(
            "inspect.full.start bundle=%s version=%s aggregate=%s suite=%s",
            bundle.name,
            bundle.version,
            aggregate,
            [s.algorithm for s in suite],
        )
        entries = []
        for item in suite:
            detector = self._registry.get(item.algorithm)
            params = detector.resolve_parameters(item.parameters, self._resources)
            run = detector.run(bundle, self._resources, params)
            self.executions += run.executions
            entries.append(
                detector.build_entry(
                    subject_digest=aggregate,
                    params=params,
                    scope=bundle.component_names,
                    findings=run.findings,
                )
            )
        log.info(
            "inspect.full.done bundle=%s verdicts=%s",
            bundle.name,
            [(e.algorithm, e.verdict) for e in entries],
        )
        return entries

    def issue_certificate(
        self,
        bundle: FirmwareBundle,
        entries: Sequence[InspectionEntry],
        inspector_org: str,
        key: Ed25519PrivateKey,
        key_id: str,
        options: IssueOptions | None = None,
    ) -> SignedCertificate:
        options = options or IssueOptions()
        digest = hash_bundle(bundle)
        _check_subject(entries, digest.aggregate, "issue")

        covered: set[str] = set()
        for e in entries:
            covered |= e.backdoor_types

        supply_chain = None
        if options.include_supply_chain:
            supply_chain = tuple(
                sorted((c.name, c.supplier) for c in bundle.components if c.supplier)
            )

        body = CertificateBody(
            software_digest=digest,
            bundle_name=bundle.name,
            bundle_version=bundle.version,
            device_class=bundle.device_class,
            inspection_entries=tuple(entries),
            covered_backdoor_types=frozenset(covered),
            inspector_org=inspector_org,
            engineer=options.engineer,
            supply_chain=supply_chain,
            issued_at=options.issued_at if options.issued_at is not None else now_seconds(),
            supersedes=options.supersedes,
        )
        return sign_certificate(body, key, key_id)

    def reinspect_updated(
        self,
        old_bundle: FirmwareBundle,
        new_bundle: FirmwareBundle,
        old_entries: Sequence[InspectionEntry],
        suite: Sequence[SuiteItem],
    ) -> list[InspectionEntry]:
        old_digest = hash_bundle(old_bundle)
        new_digest = hash_bundle(new_bundle)
        _check_subject(old_entries, old_digest.aggregate, "reinspect")

        old_keys = {c.name: c.inspection_digest for c in old_bundle.components}
        changed = [
            c.name for c in new_bundle.components if old_keys.get(c.name) != c.inspection_digest
        ]
        unchanged = [n for n in new_bundle.component_names if n not in changed]
        identical = old_digest.aggregate == new_digest.aggregate and not changed
        log.info(
            "inspect.partial.start bundle=%s old=%s new=%s changed=%s removed=%s",
            new_bundle.name,
            old_digest.aggregate,
            new_digest.aggregate,
            changed,
            sorted(set(old_keys) - set(new_bundle.component_names)),
        )

        entries = []
        for item in suite:
            detector = self._registry.get(item.algorithm)
            params = detector.resolve_parameters(item.parameters, self._resources)
            previous = next(
                (
                    e
                    for e in old_entries
                    if e.algorithm == detector.algorithm and e.parameters == params
                ),
                None,
            )

            if previous is not None and identical:
                entries.append(previous)
                continue

            if previous is None or not detector.component_local:
                run = detector.run(new_bundle, self._resources, params)
                self.executions += run.executions
                entries.append(
                    detector.build_entry(
                        subject_digest=new_digest.aggregate,
                        params=params,
                        scope=new_bundle.component_names,
                        findings=run.findings,
                    )
                )
                continue

            reused = [n for n in unchanged if n in previous.component_scope]
            rerun = [n for n in new_bundle.component_names if n not in reused]
            carried = [f for f in previous.findings if f.component in reused]
            run = detector.run(new_bundle, self._resources, params, scope=rerun)
            self.executions += run.executions
            entries.append(
                detector.build_entry(
                    subject_digest=new_digest.aggregate,
                    params=params,
                    scope=new_bundle.component_names,
                    findings=[*carried, *run.findings],
                    carried_forward=reused,
                )
            )

        log.info(
            "inspect.partial.done bundle=%s verdicts=%s",
            new_bundle.name,
            [(e.algorithm, e.verdict) for e in entries],
        )
        return entries
