"""End-to-end scenario runner.

Wires an in-process certificate server, an admission verifier on loopback TCP
and one simulated prover per device, then compares decisions with the
scenario's expectations.
"""
from __future__ import annotations

import tempfile
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.core.loaders import read_json
from backdoorless_nac.core.signing import derive_private_key, public_key_hex
from backdoorless_nac.domain.entities.attestation import DeviceRegistry
from backdoorless_nac.domain.entities.certificate import (
    IssueOptions,
    SignedCertificate,
    TrustedKey,
    TrustStore,
)
from backdoorless_nac.domain.entities.firmware import Component, FirmwareBundle
from backdoorless_nac.domain.entities.scenario import (
    ActualDecision,
    DeviceResult,
    ExpectedDecision,
    Scenario,
    ScenarioDevice,
    ScenarioReport,
)
from backdoorless_nac.errors import AppError, ParseError
from backdoorless_nac.main import start_in_process
from backdoorless_nac.prover.agent import ProverAgent, run_prover
from backdoorless_nac.prover.state import boot_bundle
from backdoorless_nac.repositories.audit_repository import AuditLog
from backdoorless_nac.repositories.certificate_repository import CertificateStore
from backdoorless_nac.services.admission_service import AdmissionService
from backdoorless_nac.services.inspection_service import InspectionService
from backdoorless_nac.verifier.daemon import start_verifier
from backdoorless_nac.webclient.cert_server_client import CertServerClient

log = get_logger(__name__)

TRUSTED_ORG = "scenario-inspector"
ROGUE_ORG = "rogue-inspector"
KEY_ID = "k1"
ENGINEER = "scenario-engineer"

_PLAN_VERDICT = {"clean": "clean", "grey": "grey", "backdoor": "backdoor-found"}
_VERDICT_RANK = {"clean": 0, "grey": 1, "backdoor-found": 2}


class ScenarioError(AppError):
    pass


class ScenarioParseError(ScenarioError):
    pass


def load_scenario(path: Path) -> Scenario:
    try:
        return Scenario.model_validate(read_json(path))
    except ParseError as e:
        raise ScenarioParseError(e.message) from e
    except ValidationError as e:
        raise ScenarioParseError(f"invalid scenario {path}: {e}") from e


def _previous_version(bundle: FirmwareBundle) -> FirmwareBundle:
    first, *rest = bundle.components
    older = Component(
        name=first.name,
        content=first.content + b"\x00",
        cfg_sidecar=first.cfg_sidecar,
        supplier=first.supplier,
        capabilities=first.capabilities,
    )
    return FirmwareBundle(
        name=bundle.name,
        version=f"{bundle.version}-prev",
        device_class=bundle.device_class,
        components=(older, *rest),
    )


def _worst_verdict(entries) -> str:
    return max((e.verdict for e in entries), key=_VERDICT_RANK.__getitem__, default="clean")


def _matches(expected: ExpectedDecision, actual: ActualDecision) -> bool:
    if expected.outcome != actual.outcome:
        return False
    if expected.reasons is None:
        return True
    return {r.value for r in expected.reasons} == set(actual.reasons)


def _actual(answer: dict[str, Any]) -> ActualDecision:
    if answer.get("type") != "decision":
        return ActualDecision(outcome=f"Error:{answer.get('code')}")
    return ActualDecision(
        outcome=str(answer.get("outcome")),
        reasons=tuple(str(r) for r in answer.get("reasons") or ()),
        obligations=tuple(str(o.get("kind")) for o in answer.get("obligations") or ()),
    )


class ScenarioRunner:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        seed = scenario.seed
        self._org_keys = {
            TRUSTED_ORG: derive_private_key(seed, f"org:{TRUSTED_ORG}"),
            ROGUE_ORG: derive_private_key(seed, f"org:{ROGUE_ORG}"),
        }
        self._device_keys = {
            d.name: derive_private_key(seed, f"device:{d.name}") for d in scenario.devices
        }
        self.trust = TrustStore(
            organizations={
                org: (TrustedKey(key_id=KEY_ID, public_key_hex=public_key_hex(key)),)
                for org, key in self._org_keys.items()
            }
        )
        self.registry = DeviceRegistry(
            devices={name: public_key_hex(key) for name, key in self._device_keys.items()}
        )
        self._inspection = InspectionService(resources=scenario.resources)

    def _issue(
        self, bundle: FirmwareBundle, org: str, issued_at: int, plan: str
    ) -> SignedCertificate:
        entries = self._inspection.run_inspection(bundle, self.scenario.suite)
        wanted = _PLAN_VERDICT.get(plan)
        if wanted is not None and _worst_verdict(entries) != wanted:
            raise ScenarioError(
                f"bundle {bundle.name!r} inspects as {_worst_verdict(entries)}, plan wants {wanted}"
            )
        return self._inspection.issue_certificate(
            bundle,
            entries,
            org,
            self._org_keys[org],
            KEY_ID,
            IssueOptions(include_supply_chain=True, engineer=ENGINEER, issued_at=issued_at),
        )

    def certificates_for(self, index: int, device: ScenarioDevice) -> list[SignedCertificate]:
        bundle = device.bundle.to_bundle()
        issued_at = self.scenario.base_time + index
        plan = device.cert_plan
        if plan == "none":
            return []
        if plan == "untrusted-org":
            return [self._issue(bundle, ROGUE_ORG, issued_at, plan)]
        if plan == "stale":
            return [self._issue(_previous_version(bundle), TRUSTED_ORG, issued_at, plan)]
        return [self._issue(bundle, TRUSTED_ORG, issued_at, plan)]

    async def run(self) -> ScenarioReport:
        scenario = self.scenario
        log.info(
            "scenario.start name=%s seed=%s devices=%s",
            scenario.name,
            scenario.seed,
            len(scenario.devices),
        )
        with tempfile.TemporaryDirectory(prefix="nac-scenario-") as tmp:
            store = CertificateStore(Path(tmp) / "certificates.jsonl", self.trust)
            store.load()
            try:
                results = await self._run_with_store(store, Path(tmp))
            finally:
                store.close()

        report = ScenarioReport(
            scenario=scenario.name,
            results=tuple(results),
            passed=all(r.passed for r in results),
        )
        log.info("scenario.done name=%s pass=%s", scenario.name, report.passed)
        return report

    async def _run_with_store(self, store: CertificateStore, tmp: Path) -> list[DeviceResult]:
        scenario = self.scenario
        async with start_in_process(store) as url, CertServerClient(url) as client:
            for index, device in enumerate(scenario.devices):
                for cert in self.certificates_for(index, device):
                    await client.put_certificate(cert)

            service = AdmissionService(
                policy=scenario.policy,
                trust=self.trust,
                registry=self.registry,
                certificates=client,
                audit=AuditLog(tmp / "audit.jsonl"),
            )
            server = await start_verifier(service, "127.0.0.1", 0)
            host, port = server.sockets[0].getsockname()[:2]
            results = []
            try:
                for device, expected in zip(scenario.devices, scenario.expected):
                    state = boot_bundle(
                        device.bundle.to_bundle(), device.name, self._device_keys[device.name]
                    )
                    answer = await run_prover(ProverAgent(state, device.tamper), host, port)
                    actual = _actual(answer)
                    passed = _matches(expected, actual)
                    log.info(
                        "scenario.device name=%s expected=%s actual=%s pass=%s",
                        device.name,
                        expected.outcome,
                        actual.outcome,
                        passed,
                    )
                    results.append(
                        DeviceResult(
                            device=device.name, expected=expected, actual=actual, passed=passed
                        )
                    )
            finally:
                server.close()
                await server.wait_closed()
        return results


async def run_scenario(scenario: Scenario | Path) -> ScenarioReport:
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    return await ScenarioRunner(scenario).run()

