from __future__ import annotations

import hashlib
import random

import pytest

from backdoorless_nac.core.hashing import digest_components, hash_bundle
from backdoorless_nac.domain.entities.firmware import Component, FirmwareBundle
from backdoorless_nac.errors import DuplicateComponentName

H_EMPTY_LIST = "4f53cda18c2baa0c0354bb5f9a3ecbe5ed12ab4d8e11ba873c2f11161202b945"
H_ABC = "b5d4045c3f466fa91fe2cc6abe79232a1a57cdf104f7a26e716e0a1e2789df78"
AGGREGATE_FW_ABC = "dee51899620149f8499f02dd2ca9b380085d49d6e2b3a15223a121caaca6c044"


def _bundle(*parts: tuple[str, bytes]) -> FirmwareBundle:
    return FirmwareBundle(
        name="fw",
        version="1",
        device_class="ip-camera",
        components=tuple(Component(name=n, content=c) for n, c in parts),
    )


def test_empty_bundle_hashes_the_empty_list() -> None:
    digest = hash_bundle(_bundle())
    assert digest.component_digests == ()
    assert digest.aggregate == H_EMPTY_LIST


def test_single_component_pinned() -> None:
    digest = hash_bundle(_bundle(("fw.bin", b"ABC")))
    assert digest.component_digests == (("fw.bin", H_ABC),)
    assert digest.aggregate == AGGREGATE_FW_ABC


def test_insertion_order_is_irrelevant() -> None:
    a = hash_bundle(_bundle(("b", b"2"), ("a", b"1"), ("c", b"3")))
    b = hash_bundle(_bundle(("c", b"3"), ("a", b"1"), ("b", b"2")))
    assert a == b
    assert [n for n, _ in a.component_digests] == ["a", "b", "c"]


def test_names_sort_by_utf8_bytes() -> None:
    digest = hash_bundle(_bundle(("é", b"1"), ("b", b"2"), ("B", b"3"), ("a", b"4")))
    assert [n for n, _ in digest.component_digests] == ["B", "a", "b", "é"]


def test_duplicate_names_rejected() -> None:
    with pytest.raises(DuplicateComponentName):
        _bundle(("fw.bin", b"1"), ("fw.bin", b"2"))
    with pytest.raises(DuplicateComponentName):
        digest_components([("x", "0" * 64), ("x", "1" * 64)])


def test_content_digest_recomputes() -> None:
    component = Component(name="x", content=b"firmware bytes")
    assert component.content_digest == hashlib.sha256(b"firmware bytes").hexdigest()


def test_any_single_byte_change_changes_the_aggregate() -> None:
    rng = random.Random(3)
    for _ in range(200):
        parts = [(f"c{i}", rng.randbytes(rng.randint(1, 64))) for i in range(rng.randint(1, 5))]
        before = hash_bundle(_bundle(*parts)).aggregate

        idx = rng.randrange(len(parts))
        name, content = parts[idx]
        pos = rng.randrange(len(content))
        mutated = bytearray(content)
        mutated[pos] ^= rng.randint(1, 255)
        parts[idx] = (name, bytes(mutated))

        assert hash_bundle(_bundle(*parts)).aggregate != before
