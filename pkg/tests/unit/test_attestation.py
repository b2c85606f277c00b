from __future__ import annotations

import hashlib
import json
import random

import pytest

from backdoorless_nac.attestation.errors import (
    BadSignature,
    EmptyLog,
    LogPcrMismatch,
    MalformedLog,
    MalformedQuote,
    NonceMismatch,
    NotBooted,
    UnknownDevice,
)
from backdoorless_nac.attestation.measurement import (
    extend_register,
    measure_boot,
    replay_log,
    software_digest_from_log,
)
from backdoorless_nac.attestation.nonce import NonceCache
from backdoorless_nac.attestation.quote import (
    AttestationVerifier,
    generate_quote,
    parse_quote,
    verify_quote,
)
from backdoorless_nac.core.canonical import ZERO_DIGEST, canonical_encode
from backdoorless_nac.core.hashing import hash_bundle
from backdoorless_nac.core.signing import sign
from backdoorless_nac.domain.entities.attestation import (
    AttestationQuote,
    MeasurementEvent,
    MeasurementLog,
)
from backdoorless_nac.domain.entities.firmware import Component, FirmwareBundle
from backdoorless_nac.errors import AppError, EmptyBundle
from backdoorless_nac.prover.state import ProverState, boot_bundle

H_ABC = "b5d4045c3f466fa91fe2cc6abe79232a1a57cdf104f7a26e716e0a1e2789df78"
EXTEND_ZERO_ABC = "7198f6a012eed119e684456ea8488f45f3d245a4118d05b01f98a7efa0014250"
NONCE = bytes(range(32))


def _signed(device_key, **fields) -> AttestationQuote:
    return AttestationQuote(**fields, signature=sign(device_key, canonical_encode(fields)))


def test_extend_is_pinned() -> None:
    assert extend_register(ZERO_DIGEST, bytes.fromhex(H_ABC)).hex() == EXTEND_ZERO_ABC
    assert extend_register(ZERO_DIGEST, bytes.fromhex(H_ABC)) == hashlib.sha256(
        ZERO_DIGEST + bytes.fromhex(H_ABC)
    ).digest()


def test_empty_log_replays_to_zero() -> None:
    assert replay_log(MeasurementLog(())) == ZERO_DIGEST


def test_measure_boot_single_component(make_bundle) -> None:
    log, pcr = measure_boot(make_bundle([("fw.bin", b"ABC")]))
    assert log.events == (MeasurementEvent(name="fw.bin", digest=H_ABC),)
    assert pcr.hex() == EXTEND_ZERO_ABC


def test_boot_order_matters_for_pcr_but_not_aggregate(make_bundle) -> None:
    a = make_bundle([("x", b"1"), ("y", b"2")])
    b = make_bundle([("y", b"2"), ("x", b"1")])
    (log_a, pcr_a), (log_b, pcr_b) = measure_boot(a), measure_boot(b)
    assert pcr_a != pcr_b
    assert software_digest_from_log(log_a) == software_digest_from_log(log_b) == hash_bundle(a)


def test_empty_bundle_cannot_boot(make_bundle) -> None:
    with pytest.raises(EmptyBundle):
        measure_boot(make_bundle([]))


def test_quote_round_trip(bundle, device_key, registry) -> None:
    state = boot_bundle(bundle, "dev-1", device_key)
    quote = generate_quote(state, NONCE)
    assert verify_quote(quote, NONCE, registry) == hash_bundle(bundle)
    assert parse_quote(json.loads(json.dumps(quote.to_message()))) == quote


def test_unbooted_prover_cannot_quote(bundle, device_key) -> None:
    with pytest.raises(NotBooted):
        generate_quote(ProverState(bundle=bundle, device_id="dev-1", device_key=device_key), NONCE)
    with pytest.raises(NotBooted):
        generate_quote(None, NONCE)


def test_wrong_nonce(bundle, device_key, registry) -> None:
    quote = generate_quote(boot_bundle(bundle, "dev-1", device_key), NONCE)
    with pytest.raises(NonceMismatch):
        verify_quote(quote, bytes(32), registry)


def test_unenrolled_device(bundle, device_key, registry) -> None:
    quote = generate_quote(boot_bundle(bundle, "dev-9", device_key), NONCE)
    with pytest.raises(UnknownDevice):
        verify_quote(quote, NONCE, registry)


def test_foreign_key(bundle, rogue_key, registry) -> None:
    quote = generate_quote(boot_bundle(bundle, "dev-1", rogue_key), NONCE)
    with pytest.raises(BadSignature):
        verify_quote(quote, NONCE, registry)


def test_edited_log_with_fresh_signature(bundle, device_key, registry) -> None:
    quote = generate_quote(boot_bundle(bundle, "dev-1", device_key), NONCE)
    events = list(quote.log.events)
    events[0] = MeasurementEvent(name=events[0].name, digest="0" * 64)
    forged = _signed(
        device_key,
        pcr=quote.pcr,
        nonce=quote.nonce,
        log=MeasurementLog(tuple(events)),
        device_id="dev-1",
    )
    with pytest.raises(LogPcrMismatch):
        verify_quote(forged, NONCE, registry)


def test_empty_log(device_key, registry) -> None:
    quote = _signed(
        device_key,
        pcr=ZERO_DIGEST.hex(),
        nonce=NONCE.hex(),
        log=MeasurementLog(()),
        device_id="dev-1",
    )
    with pytest.raises(EmptyLog):
        verify_quote(quote, NONCE, registry)


def test_component_measured_twice(device_key, registry) -> None:
    log = MeasurementLog((MeasurementEvent(name="a", digest=H_ABC),) * 2)
    quote = _signed(
        device_key, pcr=replay_log(log).hex(), nonce=NONCE.hex(), log=log, device_id="dev-1"
    )
    with pytest.raises(MalformedLog):
        verify_quote(quote, NONCE, registry)


@pytest.mark.parametrize(
    "message",
    [
        {"type": "challenge"},
        {"type": "quote"},
        {"type": "quote", "pcr": "zz", "nonce": "00", "log": [], "device_id": "d", "signature": ""},
    ],
)
def test_parse_quote_rejects_malformed(message) -> None:
    with pytest.raises(MalformedQuote):
        parse_quote(message)


def test_verifier_nonces_are_single_use(bundle, device_key, registry) -> None:
    verifier = AttestationVerifier(registry)
    state = boot_bundle(bundle, "dev-1", device_key)
    nonce = verifier.challenge()
    quote = generate_quote(state, nonce)
    verifier.verify(quote, nonce)
    with pytest.raises(NonceMismatch):
        verifier.verify(quote, nonce)


def test_expired_nonce_is_rejected(bundle, device_key, registry) -> None:
    now = [0.0]
    verifier = AttestationVerifier(registry, NonceCache(ttl_seconds=5, clock=lambda: now[0]))
    nonce = verifier.challenge()
    quote = generate_quote(boot_bundle(bundle, "dev-1", device_key), nonce)
    now[0] = 6.0
    with pytest.raises(NonceMismatch):
        verifier.verify(quote, nonce)


def test_verifier_uses_the_cache_it_is_given(registry) -> None:
    cache = NonceCache(ttl_seconds=5)
    verifier = AttestationVerifier(registry, cache)
    nonce = verifier.challenge()
    assert len(cache) == 1
    assert cache.consume(nonce)


def test_attested_aggregate_matches_hash_bundle(device_key, registry) -> None:
    rng = random.Random(17)
    for i in range(200):
        components = tuple(
            Component(name=f"part-{rng.randint(0, 10_000)}-{j}", content=rng.randbytes(16))
            for j in range(rng.randint(1, 6))
        )
        bundle = FirmwareBundle(name=f"fw{i}", version="1", device_class="c", components=components)
        quote = generate_quote(boot_bundle(bundle, "dev-1", device_key), NONCE)
        assert verify_quote(quote, NONCE, registry).aggregate == hash_bundle(bundle).aggregate


def test_single_byte_mutations_of_a_quote_never_verify(bundle, device_key, registry) -> None:
    quote = generate_quote(boot_bundle(bundle, "dev-1", device_key), NONCE)
    original = canonical_encode(quote)
    rng = random.Random(8)
    for _ in range(1000):
        mutated = bytearray(original)
        pos = rng.randrange(len(mutated))
        mutated[pos] = (mutated[pos] + rng.randint(1, 255)) % 256
        try:
            candidate = AttestationQuote.model_validate(json.loads(bytes(mutated)))
            verify_quote(candidate, NONCE, registry)
        except (ValueError, AppError):
            continue
        assert canonical_encode(candidate) == original
