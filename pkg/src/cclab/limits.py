"""Search limits shared by the exact searches (set cover, exact_cc).

A limit exhaustion never aborts the process: searches catch
BudgetExceeded and fall back to a bounded/inconclusive result.
"""

from __future__ import annotations

import time
from dataclasses import dataclass


class BudgetExceeded(Exception):
    """Internal signal: a search ran out of nodes or wall-clock time."""


@dataclass(frozen=True)
class SearchLimits:
    node_budget: int = 500_000
    time_budget_ms: int | None = None
    rect_budget: int = 200_000

    def __post_init__(self):
        if self.node_budget <= 0 or self.rect_budget <= 0:
            raise ValueError("limits must be positive")
        if self.time_budget_ms is not None and self.time_budget_ms <= 0:
            raise ValueError("limits must be positive")

    @classmethod
    def parse(cls, text: str, base: "SearchLimits | None" = None) -> "SearchLimits":
        """Parse the CLI/env syntax ``node=..,ms=..,rects=..`` (any subset)."""
        base = base or cls()
        fields = {
            "node": base.node_budget,
            "ms": base.time_budget_ms,
            "rects": base.rect_budget,
        }
        text = text.strip()
        if text:
            for part in text.split(","):
                key, _, val = part.partition("=")
                key = key.strip()
                if key not in fields or not val.strip():
                    raise ValueError(f"bad limit syntax {part!r} (want node=..,ms=..,rects=..)")
                fields[key] = int(val)
        return cls(node_budget=fields["node"], time_budget_ms=fields["ms"],
                   rect_budget=fields["rects"])


class Meter:
    """Node counter plus optional wall-clock deadline.

    The node budget is deterministic; the time budget is a grace check
    between search nodes and is only deterministic when unset.
    """

    def __init__(self, limits: SearchLimits):
        self.limits = limits
        self.nodes = 0
        self._deadline = None
        if limits.time_budget_ms is not None:
            self._deadline = time.monotonic() + limits.time_budget_ms / 1000.0

    def tick(self, n: int = 1) -> None:
        self.nodes += n
        if self.nodes > self.limits.node_budget:
            raise BudgetExceeded("node budget exhausted")
        if self._deadline is not None and self.nodes % 256 == 0:
            if time.monotonic() > self._deadline:
                raise BudgetExceeded("time budget exhausted")
