from __future__ import annotations

import asyncio
import struct

import pytest

from backdoorless_nac.attestation.errors import FrameError
from backdoorless_nac.attestation.wire import (
    MAX_MESSAGE_SIZE,
    challenge_message,
    encode_frame,
    error_message,
    read_message,
)


def _reader(data: bytes) -> asyncio.StreamReader:
    reader = asyncio.StreamReader()
    reader.feed_data(data)
    reader.feed_eof()
    return reader


def test_frame_has_big_endian_length_header() -> None:
    frame = encode_frame({"type": "x"})
    assert frame[:4] == struct.pack(">I", len(frame) - 4)
    assert frame[4:] == b'{"type":"x"}'


async def test_reads_back_consecutive_frames() -> None:
    reader = _reader(encode_frame(challenge_message(b"\x01" * 32)) + encode_frame({"a": 1}))
    assert await read_message(reader) == {"type": "challenge", "nonce": "01" * 32}
    assert await read_message(reader) == {"a": 1}


@pytest.mark.parametrize(
    "data",
    [
        b"",
        b"\x00\x00",
        struct.pack(">I", 10) + b"{}",
        struct.pack(">I", MAX_MESSAGE_SIZE + 1),
        struct.pack(">I", 3) + b"\xff\xfe\xfd",
        struct.pack(">I", 3) + b"{{{",
        struct.pack(">I", 2) + b"[]",
    ],
)
async def test_bad_frames_raise_frame_error(data) -> None:
    with pytest.raises(FrameError):
        await read_message(_reader(data))


def test_oversized_messages_are_not_encoded() -> None:
    with pytest.raises(FrameError):
        encode_frame({"blob": "x" * MAX_MESSAGE_SIZE})


def test_error_message_shape() -> None:
    assert error_message("FrameError", "bad") == {
        "type": "error",
        "code": "FrameError",
        "detail": "bad",
    }
