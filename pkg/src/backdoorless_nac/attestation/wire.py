"""
Length-prefixed JSON framing for the attestation protocol.
Format: 4-byte big-endian length header followed by UTF-8 JSON bytes.
"""
from __future__ import annotations

import asyncio
import json
import struct
from typing import Any

from backdoorless_nac.attestation.errors import FrameError

HEADER_SIZE = 4
MAX_MESSAGE_SIZE = 1 << 20


def encode_frame(obj: dict[str, Any]) -> bytes:
    raw = json.dumps(obj, separators=(",", ":"), sort_keys=True).encode("utf-8")
    if len(raw) > MAX_MESSAGE_SIZE:
        raise FrameError("message too large")
    return struct.pack(">I", len(raw)) + raw


async def read_message(reader: asyncio.StreamReader) -> dict[str, Any]:
    try:
        header = await reader.readexactly(HEADER_SIZE)
        (length,) = struct.unpack(">I", header)
        if length > MAX_MESSAGE_SIZE:
            raise FrameError(f"message too large: {length} bytes")
        raw = await reader.readexactly(length)
    except asyncio.IncompleteReadError as e:
        raise FrameError("connection closed while reading") from e
    try:
        obj = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FrameError(f"invalid JSON frame: {e}") from e
    if not isinstance(obj, dict):
        raise FrameError("frame must carry a JSON object")
    return obj


async def write_message(writer: asyncio.StreamWriter, obj: dict[str, Any]) -> None:
    writer.write(encode_frame(obj))
    await writer.drain()


def challenge_message(nonce: bytes) -> dict[str, Any]:
    return {"type": "challenge", "nonce": nonce.hex()}


def error_message(code: str, detail: str) -> dict[str, Any]:
    return {"type": "error", "code": code, "detail": detail}
