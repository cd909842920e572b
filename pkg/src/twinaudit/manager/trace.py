"""Stage tracing for lifecycle operations.

Create and update handlers record named stages as they pass through the
manager's components; conformance tests check the recorded order against
the expected chains as a strict subsequence.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Sequence

__all__ = [
    "CREATE_STAGES",
    "UPDATE_STAGES",
    "TraceRecorder",
    "TraceSpan",
    "is_subsequence",
]

# interface -> core -> LCM -> runtime deploy -> data adapter push ->
# controller built -> confirmation -> response
CREATE_STAGES = (
    "interface",
    "core",
    "lcm",
    "deploy",
    "data_adapter",
    "controller",
    "confirm",
    "respond",
)

# interface -> core -> data adapter push -> controller applied -> response
UPDATE_STAGES = ("interface", "core", "data_adapter", "controller", "respond")


@dataclass
class TraceSpan:
    kind: str
    stages: list[str] = field(default_factory=list)

    def record(self, stage: str) -> None:
        self.stages.append(stage)


class TraceRecorder:
    def __init__(self) -> None:
        self.spans: list[TraceSpan] = []
        self._lock = threading.Lock()

    def span(self, kind: str) -> TraceSpan:
        span = TraceSpan(kind=kind)
        with self._lock:
            self.spans.append(span)
        return span

    def last(self, kind: str) -> TraceSpan:
        with self._lock:
            for span in reversed(self.spans):
                if span.kind == kind:
                    return span
        raise LookupError(f"no span of kind {kind!r}")


def is_subsequence(expected: Sequence[str], observed: Sequence[str]) -> bool:
    """True when expected appears in observed in order (gaps allowed)."""
    position = 0
    for stage in observed:
        if position < len(expected) and stage == expected[position]:
            position += 1
    return position == len(expected)
