"""Exact continuous symmetrization of finite unions of disjoint intervals.

The flow contracts every interval midpoint exponentially toward the origin
while half-lengths stay fixed.  When two intervals touch they are replaced by
the single interval spanning their union, and the flow continues with the
merged configuration.  All event times are solved in closed form, so the
evolution is exact up to floating-point roundoff; no time stepping happens
anywhere in this module.

At ``t = inf`` the flow reaches the centered interval of equal total measure,
i.e. the classical one-dimensional symmetrization of the union.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .validation import ValidationError, as_finite_float, check_nonnegative_time

__all__ = [
    "Interval",
    "IntervalUnion",
    "MergeEvent",
    "collision_time",
    "evolve",
    "measure",
    "merge_events",
]

# Relative tolerance used to classify touching vs. overlapping endpoints.
_CONTACT_RTOL = 1e-12


@dataclass(frozen=True)
class Interval:
    """A bounded interval described by its midpoint and half-length."""

    center: float
    half_length: float

    def __post_init__(self):
        c = as_finite_float(self.center, "center")
        r = as_finite_float(self.half_length, "half_length")
        if r < 0:
            raise ValidationError(f"half_length must be >= 0, got {r!r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_length", r)

    @property
    def left(self) -> float:
        return self.center - self.half_length

    @property
    def right(self) -> float:
        return self.center + self.half_length

    @classmethod
    def from_endpoints(cls, left: float, right: float) -> "Interval":
        left = as_finite_float(left, "left")
        right = as_finite_float(right, "right")
        if right < left:
            raise ValidationError(f"endpoints out of order: [{left}, {right}]")
        return cls(0.5 * (left + right), 0.5 * (right - left))

    def contains(self, other: "Interval", slack: float = 0.0) -> bool:
        return self.left - slack <= other.left and other.right <= self.right + slack


@dataclass(frozen=True)
class MergeEvent:
    """A contact between two adjacent intervals at an exactly solved time.

    Indices refer to the configuration immediately before the event; a chain
    of simultaneous contacts produces one event per touching pair.
    """

    time: float
    left_index: int
    right_index: int


class IntervalUnion:
    """An ordered finite union of pairwise disjoint intervals.

    The ``openness`` flag records whether the represented set is open or
    compact.  Endpoints are treated as closed for measure purposes (the
    distinction is measure zero); zero-length intervals are dropped from open
    unions and kept as points in compact ones.
    """

    __slots__ = ("intervals", "openness")

    def __init__(self, intervals: Iterable[Interval] = (), openness: str = "open"):
        if openness not in ("open", "compact"):
            raise ValidationError(f"openness must be 'open' or 'compact', got {openness!r}")
        items = [iv if isinstance(iv, Interval) else Interval(*iv) for iv in intervals]
        items.sort(key=lambda iv: (iv.center, -iv.half_length))
        if openness == "open":
            items = [iv for iv in items if iv.half_length > 0]
        for a, b in zip(items, items[1:]):
            gap = b.left - a.right
            scale = max(1.0, abs(a.right), abs(b.left))
            if gap < -_CONTACT_RTOL * scale:
                raise ValidationError(
                    f"intervals overlap: [{a.left}, {a.right}] and [{b.left}, {b.right}]"
                )
        object.__setattr__(self, "intervals", tuple(items))
        object.__setattr__(self, "openness", openness)

    def __setattr__(self, name, value):  # immutable after construction
        raise AttributeError("IntervalUnion is immutable")

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __repr__(self) -> str:
        body = ", ".join(f"[{iv.left:.6g}, {iv.right:.6g}]" for iv in self.intervals)
        return f"IntervalUnion({{{body}}}, {self.openness})"

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def measure(self) -> float:
        return float(sum(2.0 * iv.half_length for iv in self.intervals))

    def endpoints(self) -> np.ndarray:
        """All endpoints as a flat array (left_0, right_0, left_1, ...)."""
        out = np.empty(2 * len(self.intervals))
        for i, iv in enumerate(self.intervals):
            out[2 * i] = iv.left
            out[2 * i + 1] = iv.right
        return out

    def bounds(self) -> tuple[float, float]:
        if self.is_empty:
            raise ValidationError("empty union has no bounds")
        return self.intervals[0].left, self.intervals[-1].right

    def contains_point(self, x: float, slack: float = 0.0) -> bool:
        return any(iv.left - slack <= x <= iv.right + slack for iv in self.intervals)

    def contains(self, other: "IntervalUnion", slack: float = 0.0) -> bool:
        """Component-wise containment: every interval of ``other`` lies in one of ours."""
        return all(
            any(mine.contains(theirs, slack) for mine in self.intervals)
            for theirs in other.intervals
        )

    @classmethod
    def from_endpoint_pairs(
        cls, starts: Sequence[float], ends: Sequence[float], openness: str = "open"
    ) -> "IntervalUnion":
        return cls(
            (Interval.from_endpoints(a, b) for a, b in zip(starts, ends)),
            openness=openness,
        )


def measure(union: IntervalUnion) -> float:
    """Total length of the union."""
    return union.measure


def collision_time(left: Interval, right: Interval) -> float | None:
    """Exact contact time of two disjoint intervals under the contraction flow.

    The gap between midpoints decays like ``(c_r - c_l) e^{-t}`` while the
    half-lengths are constant, so contact happens at
    ``t* = log((c_r - c_l) / (R_l + R_r))``.  Touching inputs give 0.  Two
    zero-length intervals approach each other forever without touching, giving
    ``None``.
    """
    if not isinstance(left, Interval):
        left = Interval(*left)
    if not isinstance(right, Interval):
        right = Interval(*right)
    if left.center >= right.center:
        raise ValidationError("expected left.center < right.center")
    gap = right.left - left.right
    scale = max(1.0, abs(left.right), abs(right.left))
    if gap < -_CONTACT_RTOL * scale:
        raise ValidationError("intervals overlap")
    radii = left.half_length + right.half_length
    if radii == 0.0:
        return None
    ratio = (right.center - left.center) / radii
    # Disjointness forces ratio >= 1; anything below is roundoff on a contact.
    if ratio <= 1.0:
        return 0.0
    return math.log(ratio)


def _merge_touching(items: list[Interval], openness: str) -> tuple[list[Interval], list[tuple[int, int]]]:
    """Merge every touching adjacent pair; returns new list plus merged index pairs."""
    merged: list[Interval] = []
    pairs: list[tuple[int, int]] = []
    i = 0
    n = len(items)
    while i < n:
        j = i
        while j + 1 < n:
            a, b = items[j], items[j + 1]
            scale = max(1.0, abs(a.right), abs(b.left))
            if b.left - a.right <= _CONTACT_RTOL * scale:
                pairs.append((j, j + 1))
                j += 1
            else:
                break
        if j == i:
            merged.append(items[i])
        else:
            chain = items[i : j + 1]
            half = sum(iv.half_length for iv in chain)
            span_mid = 0.5 * (chain[0].left + chain[-1].right)
            merged.append(Interval(span_mid, half))
        i = j + 1
    return merged, pairs


def _advance(
    union: IntervalUnion, t: float, record: list[MergeEvent] | None = None
) -> IntervalUnion:
    items = list(union.intervals)
    elapsed = 0.0
    remaining = t
    while len(items) > 1:
        times = []
        for a, b in zip(items, items[1:]):
            times.append(collision_time(a, b))
        finite = [s for s in times if s is not None]
        if not finite:
            break
        s_star = min(finite)
        if s_star > remaining:
            break
        decay = math.exp(-s_star)
        items = [Interval(iv.center * decay, iv.half_length) for iv in items]
        elapsed += s_star
        remaining -= s_star
        items, pairs = _merge_touching(items, union.openness)
        if record is not None:
            record.extend(MergeEvent(elapsed, a, b) for a, b in pairs)
    if remaining > 0.0 and items:
        decay = math.exp(-remaining)
        items = [Interval(iv.center * decay, iv.half_length) for iv in items]
    return IntervalUnion(items, openness=union.openness)


def evolve(union: IntervalUnion, t: float) -> IntervalUnion:
    """Apply the contraction flow for time ``t`` (``inf`` gives the centered limit).

    The total measure of the output equals the input measure exactly: merges
    replace touching intervals by one interval whose half-length is the sum of
    the merged half-lengths.
    """
    t = check_nonnegative_time(t)
    if union.is_empty or t == 0.0:
        return union
    if math.isinf(t):
        half = 0.5 * union.measure
        return IntervalUnion([Interval(0.0, half)], openness=union.openness)
    return _advance(union, t)


def merge_events(union: IntervalUnion, horizon: float = math.inf) -> list[MergeEvent]:
    """All merge events the flow produces up to ``horizon`` (exact times).

    Events of a simultaneous chain are reported left to right; the merged
    result does not depend on that order because merging touching intervals is
    associative.
    """
    horizon = check_nonnegative_time(horizon, "horizon")
    events: list[MergeEvent] = []
    if union.is_empty or horizon == 0.0:
        return events
    _advance(union, horizon, events)
    return events
