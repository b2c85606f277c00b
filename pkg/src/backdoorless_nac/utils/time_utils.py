from __future__ import annotations

import time
from datetime import datetime, timezone


def now_seconds() -> int:
    return int(time.time())


def iso_seconds(epoch_seconds: int) -> str:
    return datetime.fromtimestamp(epoch_seconds, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
