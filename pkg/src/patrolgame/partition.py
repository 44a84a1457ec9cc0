"""Per-round interval partitions of the patrol space.

Cut points are built back to front: round ``t`` inherits the cut points of
round ``t + 1`` shifted by the patrol speed, plus the protection boundaries of
the targets at ``t``.  Integer positions that share an interval are
interchangeable: same protected targets, same reachable intervals next round.

An infinitesimal offset is carried symbolically in :class:`EndPoint` so the
ordering "just above x" is exact regardless of the instance.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction

from .core import ProblemInstance
from .errors import EmptyFeasibleSet


@dataclass(frozen=True, order=True)
class EndPoint:
    """``value + eps * epsilon`` for a positive infinitesimal epsilon."""

    value: Fraction
    eps: int = 0

    def shift(self, delta) -> "EndPoint":
        return EndPoint(self.value + delta, self.eps)

    def first_integer(self) -> int:
        """Smallest integer m with (m, 0) >= self."""
        if self.eps == 0:
            return math.ceil(self.value)
        return math.floor(self.value) + 1

    def last_integer_below(self) -> int:
        """Largest integer m with (m, 0) < self."""
        if self.eps == 0:
            return math.ceil(self.value) - 1
        return math.floor(self.value)

    def __str__(self):
        return f"{self.value}" + (f"+{self.eps}e" if self.eps else "")


@dataclass(frozen=True)
class Interval:
    index: int
    start: EndPoint
    end: EndPoint
    lo: int
    hi: int

    def __contains__(self, m) -> bool:
        return self.lo <= m <= self.hi

    def __str__(self):
        return f"{{{self.lo}}}" if self.lo == self.hi else f"{{{self.lo}..{self.hi}}}"


@dataclass(frozen=True)
class TimePartition:
    t: int
    cut_points: tuple[EndPoint, ...]
    intervals: tuple[Interval, ...]

    @property
    def size(self) -> int:
        return len(self.intervals)

    def interval(self, i: int) -> Interval:
        """1-based lookup."""
        return self.intervals[i - 1]

    def locate(self, m: int) -> int:
        """1-based index of the interval holding integer position ``m``."""
        los = [iv.lo for iv in self.intervals]
        i = bisect.bisect_right(los, m)
        if i == 0 or m > self.intervals[i - 1].hi:
            raise ValueError(f"position {m} is outside [0, M]")
        return i


@dataclass(frozen=True)
class PartitionSet:
    rounds: tuple[TimePartition, ...]
    speed: int

    def __getitem__(self, t: int) -> TimePartition:
        return self.rounds[t - 1]

    @property
    def T(self) -> int:
        return len(self.rounds)

    def total_intervals(self) -> int:
        return sum(p.size for p in self.rounds)


def _contains_integer(start: EndPoint, end: EndPoint) -> bool:
    return start.first_integer() <= end.last_integer_below()


def _interval_points(instance: ProblemInstance, t: int, later, speed: int, M: int):
    low, top = EndPoint(Fraction(0)), EndPoint(Fraction(M), 1)
    points = {low, top}

    def insert(p: EndPoint):
        if low < p < top:
            points.add(p)

    R = instance.R
    for a in range(instance.n):
        x = instance.position(a, t)
        if x - R > 0:
            insert(EndPoint(x - R))
        if x + R < M:
            insert(EndPoint(x + R, 1))
    for p in later:
        insert(p.shift(-speed))
        insert(p.shift(speed))

    ordered = sorted(points)
    kept = [
        p for p, nxt in zip(ordered, ordered[1:]) if _contains_integer(p, nxt)
    ]
    kept.append(ordered[-1])
    return tuple(kept)


def build_partitions(instance: ProblemInstance) -> PartitionSet:
    M = instance.space_max
    speed = instance.speed
    rounds = [None] * instance.T
    later: tuple[EndPoint, ...] = ()
    for t in range(instance.T, 0, -1):
        cuts = _interval_points(instance, t, later, speed, M)
        intervals = tuple(
            Interval(i + 1, s, f, s.first_integer(), f.last_integer_below())
            for i, (s, f) in enumerate(zip(cuts, cuts[1:]))
        )
        rounds[t - 1] = TimePartition(t, cuts, intervals)
        later = cuts
    return PartitionSet(tuple(rounds), speed)


def protected_by_interval(interval: Interval, pos, R) -> bool:
    """Whether a patrol anywhere in ``interval`` protects a target at ``pos``.

    Uniform over the interval for partitions built by :func:`build_partitions`.
    """
    return interval.lo <= pos + R and interval.hi >= pos - R


def feasible_move_exists(I: Interval, J: Interval, D) -> bool:
    d = math.floor(D)
    return J.lo <= I.hi + d and J.hi >= I.lo - d


def feasible_set(partitions: PartitionSet, t: int, i: int, j: int) -> tuple[int, int]:
    """Index range ``(i', j')`` at round ``t + 1`` reachable from intervals ``i..j`` at ``t``."""
    d = partitions.speed
    here, nxt = partitions[t], partitions[t + 1]
    reach_lo = here.interval(i).lo - d
    reach_hi = here.interval(j).hi + d
    his = [iv.hi for iv in nxt.intervals]
    los = [iv.lo for iv in nxt.intervals]
    first = bisect.bisect_left(his, reach_lo) + 1
    last = bisect.bisect_right(los, reach_hi)
    if first > last:
        raise EmptyFeasibleSet(f"round {t} intervals {i}..{j} reach nothing at round {t + 1}")
    return first, last
