from __future__ import annotations

from collections.abc import Iterable

from backdoorless_nac.core.canonical import canonical_encode, sha256_hex
from backdoorless_nac.domain.entities.firmware import FirmwareBundle, SoftwareDigest
from backdoorless_nac.errors import DuplicateComponentName


def digest_components(pairs: Iterable[tuple[str, str]]) -> SoftwareDigest:
    """Build a SoftwareDigest from (name, content digest) pairs in any order."""
    seen: set[str] = set()
    ordered: list[tuple[str, str]] = []
    for name, digest in pairs:
        if name in seen:
            raise DuplicateComponentName(name)
        seen.add(name)
        ordered.append((name, digest))
    ordered.sort(key=lambda p: p[0].encode("utf-8"))
    aggregate = sha256_hex(canonical_encode(ordered))
    return SoftwareDigest(component_digests=tuple(ordered), aggregate=aggregate)


def hash_bundle(bundle: FirmwareBundle) -> SoftwareDigest:
    return digest_components((c.name, c.content_digest) for c in bundle.components)
