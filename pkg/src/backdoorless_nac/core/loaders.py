"""On-disk formats: bundles, trust stores, registries, keys, policies, resources."""
from __future__ import annotations

import base64
import binascii
import json
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.core.signing import DeviceIdentity, InspectorKey
from backdoorless_nac.domain.entities.attestation import DeviceRegistry
from backdoorless_nac.domain.entities.certificate import SignedCertificate, TrustStore
from backdoorless_nac.domain.entities.firmware import Component, FirmwareBundle
from backdoorless_nac.domain.entities.inspection import (
    ControlFlowGraph,
    DeviceClassProfile,
    InspectionEntry,
    InspectionResources,
    SuiteItem,
)
from backdoorless_nac.domain.entities.policy import SecurityPolicy
from backdoorless_nac.errors import AppError, ParseError

log = get_logger(__name__)

M = TypeVar("M", bound=BaseModel)


def read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ParseError(f"file not found: {path}") from e
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"cannot read JSON from {path}: {e}") from e


def parse_model(model: type[M], data: Any, what: str) -> M:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ParseError(f"invalid {what}: {e.errors()[0].get('msg', e)}") from e


def write_json(path: Path, data: Any) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_model(path: Path, model: BaseModel) -> None:
    write_json(path, model.model_dump(mode="json"))


# ----------------------------
# Firmware bundles
# ----------------------------


def _bundle(manifest: dict[str, Any], components: list[Component]) -> FirmwareBundle:
    try:
        return FirmwareBundle(
            name=manifest["name"],
            version=manifest["version"],
            device_class=manifest["device_class"],
            components=tuple(components),
        )
    except KeyError as e:
        raise ParseError(f"manifest missing field {e}") from e
    except ValidationError as e:
        raise ParseError(f"invalid bundle: {e}") from e


def _component(entry: dict[str, Any], content: bytes, cfg: Any) -> Component:
    try:
        return Component(
            name=entry["name"],
            content=content,
            cfg_sidecar=parse_model(ControlFlowGraph, cfg, "cfg sidecar") if cfg else None,
            supplier=entry.get("supplier"),
            capabilities=frozenset(entry.get("capabilities") or ()),
        )
    except KeyError as e:
        raise ParseError(f"component missing field {e}") from e
    except ValidationError as e:
        raise ParseError(f"invalid component: {e}") from e


def load_bundle_dir(path: Path) -> FirmwareBundle:
    root = Path(path)
    manifest = read_json(root / "manifest.json")
    if not isinstance(manifest, dict):
        raise ParseError("manifest must be a JSON object")
    components = []
    for entry in manifest.get("components") or []:
        if not isinstance(entry, dict) or "path" not in entry:
            raise ParseError("manifest component entries need name and path")
        file = root / entry["path"]
        try:
            content = file.read_bytes()
        except OSError as e:
            raise ParseError(f"component file missing: {file}") from e
        cfg = read_json(root / entry["cfg"]) if entry.get("cfg") else None
        components.append(_component(entry, content, cfg))
    log.info("bundle.load dir=%s components=%s", root, len(components))
    return _bundle(manifest, components)


def bundle_from_document(doc: Any) -> FirmwareBundle:
    """Single-document bundle: components carry `content_b64` and inline `cfg`."""
    if not isinstance(doc, dict):
        raise ParseError("bundle document must be a JSON object")
    components = []
    for entry in doc.get("components") or []:
        if not isinstance(entry, dict):
            raise ParseError("component entries must be objects")
        try:
            content = base64.b64decode(entry.get("content_b64", ""), validate=True)
        except (binascii.Error, ValueError) as e:
            raise ParseError(f"component {entry.get('name')!r}: bad base64 content") from e
        components.append(_component(entry, content, entry.get("cfg")))
    return _bundle(doc, components)


def load_bundle(path: Path, *, inline: bool = False) -> FirmwareBundle:
    if inline:
        return bundle_from_document(read_json(path))
    return load_bundle_dir(path)


# ----------------------------
# Keys, trust and registries
# ----------------------------


def load_trust_store(path: Path) -> TrustStore:
    return parse_model(TrustStore, {"organizations": read_json(path)}, "trust store")


def trust_store_document(trust: TrustStore) -> dict[str, Any]:
    return trust.model_dump(mode="json")["organizations"]


def load_device_registry(path: Path) -> DeviceRegistry:
    return parse_model(DeviceRegistry, {"devices": read_json(path)}, "device registry")


def load_inspector_key(path: Path) -> InspectorKey:
    return parse_model(InspectorKey, read_json(path), "inspector key")


def load_device_identity(path: Path) -> DeviceIdentity:
    return parse_model(DeviceIdentity, read_json(path), "device identity")


def load_policy(path: Path) -> SecurityPolicy:
    return parse_model(SecurityPolicy, read_json(path), "security policy")


def load_certificate(path: Path) -> SignedCertificate:
    return parse_model(SignedCertificate, read_json(path), "certificate")


# ----------------------------
# Inspection inputs
# ----------------------------


def load_suite(path: Path) -> list[SuiteItem]:
    data = read_json(path)
    if not isinstance(data, list):
        raise ParseError("suite must be a JSON list")
    return [parse_model(SuiteItem, item, "suite item") for item in data]


def load_entries(path: Path) -> list[InspectionEntry]:
    data = read_json(path)
    if not isinstance(data, list):
        raise ParseError("entries must be a JSON list")
    return [parse_model(InspectionEntry, item, "inspection entry") for item in data]


def load_resources(
    *,
    bundle_file: Path | None = None,
    patterns: Path | None = None,
    profiles: Path | None = None,
    advisories: Path | None = None,
    markers: Path | None = None,
) -> InspectionResources:
    """Combined resources file first, then the individual database files override."""
    data: dict[str, Any] = {}
    if bundle_file is not None:
        base = read_json(bundle_file)
        if not isinstance(base, dict):
            raise ParseError("resources file must be a JSON object")
        data.update(base)
    if patterns is not None:
        data["credential_patterns"] = read_json(patterns)
    if profiles is not None:
        data["profiles"] = [
            parse_model(DeviceClassProfile, p, "device class profile").model_dump()
            for p in read_json(profiles)
        ]
    if advisories is not None:
        data["advisories"] = {"advisories": read_json(advisories)}
    elif isinstance(data.get("advisories"), dict) and "advisories" not in data["advisories"]:
        data["advisories"] = {"advisories": data["advisories"]}
    if markers is not None:
        data["capability_markers"] = read_json(markers)
    try:
        return InspectionResources.model_validate(data)
    except (ValidationError, AppError) as e:
        raise ParseError(f"invalid inspection resources: {e}") from e
