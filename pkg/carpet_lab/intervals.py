"""
intervals.py

Finite unions of closed intervals on the line, used for vertical slices, horizontal
projections and their neighbourhoods, plus a sweep that counts how many intervals of a
family cover each point of a range.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable
from typing import Iterator
from typing import Union

Number = Union[Fraction, float]


@dataclass(frozen=True)
class IntervalUnion1D:
    """Sorted, pairwise disjoint closed intervals."""

    intervals: tuple[tuple[Number, Number], ...] = ()

    @classmethod
    def from_intervals(cls,
                       intervals: Iterable[tuple[Number, Number]],
                       tolerance: Number = 0) -> IntervalUnion1D:
        """Normalize intervals, merging those that overlap, touch or lie within tolerance."""

        pieces = sorted((lo, hi) for lo, hi in intervals)
        merged: list[tuple[Number, Number]] = []
        for lo, hi in pieces:
            if lo > hi:
                raise ValueError(f"inverted interval: [{lo}, {hi}]")
            if merged and lo <= merged[-1][1] + tolerance:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        return cls(tuple(merged))

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[tuple[Number, Number]]:
        return iter(self.intervals)

    def is_empty(self) -> bool:
        return not self.intervals

    def total_length(self) -> Number:
        return sum((hi - lo for lo, hi in self.intervals), Fraction(0))

    def hull(self) -> tuple[Number, Number]:
        if not self.intervals:
            raise ValueError("the empty union has no hull")
        return self.intervals[0][0], self.intervals[-1][1]

    def contains(self, x: Number, slack: Number = 0) -> bool:
        index = bisect.bisect_right(self.intervals, (x, float('inf'))) - 1
        candidates = self.intervals[max(index, 0):index + 2]
        return any(lo - slack <= x <= hi + slack for lo, hi in candidates)

    def distance_to(self, x: Number) -> Number:
        """Distance from x to the union."""

        if not self.intervals:
            raise ValueError("distance to the empty union is undefined")
        return min(max(0, lo - x, x - hi) for lo, hi in self.intervals)

    def midpoints(self) -> list[Number]:
        return [(lo + hi) / 2 for lo, hi in self.intervals]

    def gaps(self, lo: Number | None = None, hi: Number | None = None) -> list[tuple[Number, Number]]:
        """Open intervals of [lo, hi] (default: the hull) not covered by the union."""

        if not self.intervals:
            return [] if lo is None or hi is None or lo >= hi else [(lo, hi)]
        first, last = self.hull()
        lo = first if lo is None else lo
        hi = last if hi is None else hi
        result = []
        cursor = lo
        for left, right in self.intervals:
            if left > cursor:
                result.append((cursor, min(left, hi)))
            cursor = max(cursor, right)
            if cursor >= hi:
                break
        if cursor < hi:
            result.append((cursor, hi))
        return [(p, q) for p, q in result if p < q]

    def fatten(self, epsilon: Number) -> IntervalUnion1D:
        """The closed epsilon-neighbourhood."""

        if epsilon < 0:
            raise ValueError(f"epsilon must be non-negative, got {epsilon}")
        return IntervalUnion1D.from_intervals((lo - epsilon, hi + epsilon) for lo, hi in self.intervals)

    def clip(self, lo: Number, hi: Number) -> IntervalUnion1D:
        return IntervalUnion1D(tuple((max(a, lo), min(b, hi))
                                     for a, b in self.intervals if b >= lo and a <= hi))

    def transform(self, scale: Number, shift: Number) -> IntervalUnion1D:
        """Image under x -> scale * x + shift."""

        return IntervalUnion1D.from_intervals(tuple(sorted((scale * a + shift, scale * b + shift)))
                                              for a, b in self.intervals)

    def union(self, other: IntervalUnion1D) -> IntervalUnion1D:
        return IntervalUnion1D.from_intervals(self.intervals + other.intervals)

    def intersection(self, other: IntervalUnion1D) -> IntervalUnion1D:
        result = []
        i = j = 0
        while i < len(self.intervals) and j < len(other.intervals):
            lo = max(self.intervals[i][0], other.intervals[j][0])
            hi = min(self.intervals[i][1], other.intervals[j][1])
            if lo <= hi:
                result.append((lo, hi))
            if self.intervals[i][1] < other.intervals[j][1]:
                i += 1
            else:
                j += 1
        return IntervalUnion1D.from_intervals(result)

    def to_rows(self) -> list[tuple[float, float]]:
        return [(float(lo), float(hi)) for lo, hi in self.intervals]


@dataclass(frozen=True)
class CoverageSegment:
    """A point (lo == hi) or open piece (lo < hi) with its coverage count."""

    lo: Number
    hi: Number
    count: int

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi


def coverage_segments(intervals: Iterable[tuple[Number, Number]],
                      lo: Number,
                      hi: Number,
                      extra_breakpoints: Iterable[Number] = ()) -> list[CoverageSegment]:
    """Number of closed intervals covering each point of [lo, hi].

    The range is cut at every interval endpoint inside it; each breakpoint and each open
    piece between consecutive breakpoints has constant coverage. extra_breakpoints adds
    cuts, so two families swept with the same cuts yield aligned segments.
    """

    intervals = list(intervals)
    starts = sorted(a for a, _ in intervals)
    ends = sorted(b for _, b in intervals)
    cuts = [e for pair in intervals for e in pair] + list(extra_breakpoints)
    breakpoints = sorted({lo, hi} | {e for e in cuts if lo <= e <= hi})

    def at_point(e):
        return bisect.bisect_right(starts, e) - bisect.bisect_left(ends, e)

    def on_piece(p, q):
        return bisect.bisect_right(starts, p) - bisect.bisect_left(ends, q)

    segments = []
    for index, point in enumerate(breakpoints):
        segments.append(CoverageSegment(point, point, at_point(point)))
        if index + 1 < len(breakpoints):
            following = breakpoints[index + 1]
            segments.append(CoverageSegment(point, following, on_piece(point, following)))
    return segments
