from __future__ import annotations

from pathlib import Path

import pytest

from backdoorless_nac.core.signing import derive_private_key, public_key_hex
from backdoorless_nac.domain.entities.attestation import DeviceRegistry
from backdoorless_nac.domain.entities.certificate import IssueOptions, TrustedKey, TrustStore
from backdoorless_nac.domain.entities.firmware import Component, FirmwareBundle
from backdoorless_nac.domain.entities.inspection import (
    CfgNode,
    ControlFlowGraph,
    StaticCompare,
    SuiteItem,
)
from backdoorless_nac.domain.entities.policy import RequiredAlgorithm, SecurityPolicy
from backdoorless_nac.services.inspection_service import InspectionService

REPO_ROOT = Path(__file__).resolve().parents[1]
SCENARIO_DIR = REPO_ROOT / "tests" / "fixtures" / "scenarios"

ORG = "acme-labs"
ROGUE = "shady-labs"
DEVICE_ID = "dev-1"
BASE_TIME = 1_700_000_000


def _graph(nodes: dict[str, tuple[str, ...]], edges, compares=()) -> ControlFlowGraph:
    return ControlFlowGraph(
        nodes=tuple(CfgNode(id=n, labels=frozenset(labels)) for n, labels in nodes.items()),
        edges=tuple(edges),
        static_compares=tuple(StaticCompare(node=n, literal_hex=lit) for n, lit in compares),
    )


@pytest.fixture
def cfgs() -> dict[str, ControlFlowGraph]:
    guarded = {"e": ("entry",), "a": ("auth-check",), "p": ("privileged",)}
    return {
        "clean": _graph(guarded, [("e", "a"), ("a", "p")]),
        "backdoor": _graph(guarded, [("e", "a"), ("a", "p"), ("e", "p")]),
        # the compare at s exclusively guards x, y, z: 3 of 8 nodes
        "grey": _graph(
            {**guarded, "s": (), "x": (), "y": (), "z": (), "w": ()},
            [("e", "a"), ("a", "p"), ("e", "s"), ("s", "x"), ("x", "y"), ("y", "z"), ("e", "w")],
            [("s", "6d61676963")],
        ),
    }


@pytest.fixture
def make_bundle():
    def _make(components, *, name="router-fw", version="1.0", device_class="home-router"):
        parts = []
        for spec in components:
            cname, content, *rest = spec
            cfg = rest[0] if len(rest) > 0 else None
            supplier = rest[1] if len(rest) > 1 else None
            parts.append(
                Component(name=cname, content=content, cfg_sidecar=cfg, supplier=supplier)
            )
        return FirmwareBundle(
            name=name, version=version, device_class=device_class, components=tuple(parts)
        )

    return _make


@pytest.fixture
def bundle(make_bundle, cfgs) -> FirmwareBundle:
    return make_bundle(
        [
            ("boot.bin", b"BOOTLOADER v2", None, "acme-silicon"),
            ("kernel.img", b"KERNEL 5.15", cfgs["clean"], "acme-os"),
            ("webui.bin", b"WEBUI static assets", cfgs["clean"], "acme-web"),
        ]
    )


@pytest.fixture
def inspector_key():
    return derive_private_key(7, f"org:{ORG}")


@pytest.fixture
def rogue_key():
    return derive_private_key(7, f"org:{ROGUE}")


@pytest.fixture
def device_key():
    return derive_private_key(7, f"device:{DEVICE_ID}")


@pytest.fixture
def trust_store(inspector_key, rogue_key) -> TrustStore:
    return TrustStore(
        organizations={
            ORG: (TrustedKey(key_id="k1", public_key_hex=public_key_hex(inspector_key)),),
            ROGUE: (TrustedKey(key_id="k1", public_key_hex=public_key_hex(rogue_key)),),
        }
    )


@pytest.fixture
def registry(device_key) -> DeviceRegistry:
    return DeviceRegistry(devices={DEVICE_ID: public_key_hex(device_key)})


@pytest.fixture
def suite() -> list[SuiteItem]:
    return [
        SuiteItem(algorithm="auth-bypass-reach@1"),
        SuiteItem(algorithm="static-compare-score@1"),
    ]


@pytest.fixture
def policy() -> SecurityPolicy:
    return SecurityPolicy(
        required_backdoor_types=frozenset({"auth-bypass"}),
        required_algorithms=(RequiredAlgorithm(algorithm="auth-bypass-reach@1"),),
        trusted_orgs=frozenset({ORG}),
    )


@pytest.fixture
def issue(suite, inspector_key, rogue_key):
    """Inspect a bundle with the default suite and sign the result."""

    def _issue(
        target: FirmwareBundle,
        *,
        org: str = ORG,
        issued_at: int = BASE_TIME,
        supersedes: str | None = None,
        engineer: str | None = "j.doe",
        entries=None,
    ):
        service = InspectionService()
        if entries is None:
            entries = service.run_inspection(target, suite)
        key = inspector_key if org == ORG else rogue_key
        return service.issue_certificate(
            target,
            entries,
            org,
            key,
            "k1",
            IssueOptions(
                include_supply_chain=True,
                engineer=engineer,
                supersedes=supersedes,
                issued_at=issued_at,
            ),
        )

    return _issue
