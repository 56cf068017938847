"""Sets of time intervals and the algebra the scoring code builds on.

Intervals are half-open ``[start, end)`` pairs of float seconds. A
:class:`Timeline` keeps them sorted, pairwise disjoint and coalesced
(touching intervals merge, empty ones vanish), so summing interval
lengths never double-counts time. All endpoint comparisons are exact
float comparisons; no epsilon is applied anywhere.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Tuple

Interval = Tuple[float, float]


class Timeline:
    """An immutable, normalized set of half-open intervals."""

    __slots__ = ("_intervals",)

    def __init__(self, intervals: Iterable[Interval] = ()):
        cleaned = []
        for start, end in intervals:
            start = float(start)
            end = float(end)
            if not (math.isfinite(start) and math.isfinite(end)):
                raise ValueError(f"non-finite interval ({start!r}, {end!r})")
            if end < start:
                raise ValueError(f"inverted interval ({start!r}, {end!r})")
            if end > start:
                cleaned.append((start, end))
        cleaned.sort()
        merged: list[list[float]] = []
        for start, end in cleaned:
            if merged and start <= merged[-1][1]:
                if end > merged[-1][1]:
                    merged[-1][1] = end
            else:
                merged.append([start, end])
        self._intervals = tuple((s, e) for s, e in merged)

    @property
    def intervals(self) -> Tuple[Interval, ...]:
        return self._intervals

    @property
    def total_duration(self) -> float:
        """Sum of (end - start) over the intervals."""
        return math.fsum(e - s for s, e in self._intervals)

    def union(self, other: "Timeline") -> "Timeline":
        return Timeline(self._intervals + other._intervals)

    def intersect(self, other: "Timeline") -> "Timeline":
        a, b = self._intervals, other._intervals
        out = []
        i = j = 0
        while i < len(a) and j < len(b):
            start = max(a[i][0], b[j][0])
            end = min(a[i][1], b[j][1])
            if start < end:
                out.append((start, end))
            # advance whichever interval finishes first
            if a[i][1] <= b[j][1]:
                i += 1
            else:
                j += 1
        return Timeline(out)

    def subtract(self, other: "Timeline") -> "Timeline":
        b = other._intervals
        out = []
        j = 0
        for start, end in self._intervals:
            cursor = start
            # b intervals ending at or before the cursor can never matter again
            while j < len(b) and b[j][1] <= cursor:
                j += 1
            k = j
            while k < len(b) and b[k][0] < end:
                b_start, b_end = b[k]
                if b_start > cursor:
                    out.append((cursor, b_start))
                if b_end > cursor:
                    cursor = b_end
                if cursor >= end:
                    break
                k += 1
            if cursor < end:
                out.append((cursor, end))
        return Timeline(out)

    def overlaps(self, instant: float) -> bool:
        """True if some interval contains ``instant`` (half-open test)."""
        for start, end in self._intervals:
            if start <= instant < end:
                return True
            if start > instant:
                break
        return False

    def __or__(self, other: "Timeline") -> "Timeline":
        return self.union(other)

    def __and__(self, other: "Timeline") -> "Timeline":
        return self.intersect(other)

    def __sub__(self, other: "Timeline") -> "Timeline":
        return self.subtract(other)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self._intervals)

    def __len__(self) -> int:
        return len(self._intervals)

    def __bool__(self) -> bool:
        return bool(self._intervals)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Timeline):
            return NotImplemented
        return self._intervals == other._intervals

    def __hash__(self) -> int:
        return hash(self._intervals)

    def __repr__(self) -> str:
        inside = ", ".join(f"[{s:g}, {e:g})" for s, e in self._intervals)
        return f"Timeline({inside})"
