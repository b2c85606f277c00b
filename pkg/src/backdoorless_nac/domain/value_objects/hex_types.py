from __future__ import annotations

from typing import Annotated

from pydantic import StringConstraints

# 32-byte digest, lowercase hex
Digest = Annotated[str, StringConstraints(pattern=r"^[0-9a-f]{64}$")]

# arbitrary byte string, lowercase hex
HexBytes = Annotated[str, StringConstraints(pattern=r"^(?:[0-9a-f]{2})*$")]

# raw Ed25519 public key (32 bytes), lowercase hex
PublicKeyHex = Annotated[str, StringConstraints(pattern=r"^[0-9a-f]{64}$")]
