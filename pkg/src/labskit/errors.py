"""Shared error types and the memory-budget knob."""
from __future__ import annotations

import os

DEFAULT_MEM_BUDGET_GB = 8.0


class ResourceLimitError(RuntimeError):
    """Requested allocation exceeds the configured memory budget."""


def memory_budget_bytes() -> int:
    raw = os.environ.get("LABS_MEM_BUDGET_GB", "")
    try:
        gb = float(raw) if raw else DEFAULT_MEM_BUDGET_GB
    except ValueError:
        gb = DEFAULT_MEM_BUDGET_GB
    return int(gb * 2**30)
