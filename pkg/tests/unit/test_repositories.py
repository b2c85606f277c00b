from __future__ import annotations

import pytest

from backdoorless_nac.core.canonical import canonical_encode
from backdoorless_nac.domain.entities.policy import Decision, Evidence, ReasonCode
from backdoorless_nac.errors import CorruptStore, StorageFailure
from backdoorless_nac.repositories.audit_repository import AuditLog
from backdoorless_nac.repositories.certificate_repository import CertificateStore

BASE = 1_700_000_000


@pytest.fixture
def store_path(tmp_path):
    return tmp_path / "certs" / "store.jsonl"


@pytest.fixture
def open_store(store_path, trust_store):
    stores = []

    def _open() -> CertificateStore:
        store = CertificateStore(store_path, trust_store)
        store.load()
        stores.append(store)
        return store

    yield _open
    for store in stores:
        store.close()


async def test_put_get_and_duplicates(open_store, bundle, issue) -> None:
    store = open_store()
    old = issue(bundle, issued_at=BASE)
    new = issue(bundle, issued_at=BASE + 5)
    assert await store.put(old)
    assert await store.put(new)
    assert not await store.put(old)
    aggregate = old.body.software_digest.aggregate
    assert [c.body_digest for c in store.get(aggregate)] == [new.body_digest, old.body_digest]
    assert store.get("0" * 64) == []
    assert len(store) == 2
    assert store.contains(new.body_digest)


async def test_reload_restores_identical_contents(open_store, bundle, make_bundle, issue) -> None:
    store = open_store()
    for i in range(5):
        await store.put(issue(bundle, issued_at=BASE + i))
    await store.put(issue(make_bundle([("x", b"other")])))
    before = canonical_encode(store.all())
    store.close()

    assert canonical_encode(open_store().all()) == before


async def test_duplicate_journal_lines_are_compacted(open_store, store_path, bundle, issue) -> None:
    store = open_store()
    await store.put(issue(bundle))
    store.close()
    line = store_path.read_bytes()
    store_path.write_bytes(line * 3)

    reloaded = open_store()
    assert len(reloaded) == 1
    assert store_path.read_bytes() == line


async def test_torn_tail_is_dropped(open_store, store_path, bundle, issue) -> None:
    store = open_store()
    first = issue(bundle, issued_at=BASE)
    await store.put(first)
    store.close()
    partial = canonical_encode(issue(bundle, issued_at=BASE + 1))[:-20]
    with open(store_path, "ab") as f:
        f.write(partial)

    reloaded = open_store()
    assert [c.body_digest for c in reloaded.all()] == [first.body_digest]
    assert store_path.read_bytes().endswith(b"\n")


def test_corrupt_line_refuses_to_load(store_path, trust_store) -> None:
    store_path.parent.mkdir(parents=True)
    store_path.write_bytes(b"{not json}\n")
    with pytest.raises(CorruptStore):
        CertificateStore(store_path, trust_store).load()


async def test_unverifiable_record_refuses_to_load(open_store, store_path, bundle, issue) -> None:
    store = open_store()
    await store.put(issue(bundle))
    store.close()
    text = store_path.read_text().replace('"bundle_version":"1.0"', '"bundle_version":"6.6"')
    store_path.write_text(text)
    with pytest.raises(CorruptStore):
        CertificateStore(store_path, store.trust).load()


async def test_put_before_load_fails(store_path, trust_store, bundle, issue) -> None:
    with pytest.raises(StorageFailure):
        await CertificateStore(store_path, trust_store).put(issue(bundle))


async def test_audit_log_records_decisions(tmp_path) -> None:
    audit = AuditLog(tmp_path / "audit" / "audit.jsonl")
    deny = Decision(
        outcome="Deny",
        reasons=(ReasonCode.ATTESTATION,),
        evidence=Evidence(device_id="dev-1", quote_pcr="ab" * 32),
    )
    record = await audit.append(deny, timestamp=0)
    await audit.append(Decision(outcome="Allow", evidence=Evidence(device_id="dev-2")), 60)

    assert record == {
        "timestamp": "1970-01-01T00:00:00Z",
        "device_id": "dev-1",
        "outcome": "Deny",
        "reasons": ["ATTESTATION"],
        "obligations": [],
        "quote_pcr": "ab" * 32,
        "certificate_body_digest": None,
    }
    assert [r["outcome"] for r in audit.read_all()] == ["Deny", "Allow"]


def test_empty_audit_log_reads_as_empty(tmp_path) -> None:
    assert AuditLog(tmp_path / "missing.jsonl").read_all() == []
