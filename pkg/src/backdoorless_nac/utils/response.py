from __future__ import annotations

from typing import Any


def failure(error: str, detail: str) -> dict[str, Any]:
    return {"error": error, "detail": detail}
