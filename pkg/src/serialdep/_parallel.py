"""Worker-count policy shared by the resampling code."""

from __future__ import annotations

import os

ENV_VAR = "SERIALDEP_THREADS"


def worker_count() -> int:
    """Number of worker threads; ``SERIALDEP_THREADS`` caps it when set.

    Results never depend on this value, only wall-clock time does.
    """
    raw = os.environ.get(ENV_VAR, "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from None
        if value < 1:
            raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}")
        return value
    return os.cpu_count() or 1
