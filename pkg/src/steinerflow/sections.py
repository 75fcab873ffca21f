"""Piecewise-linear section profiles and their exact layer-cake machinery.

A section profile is the restriction of a grid function to one line along the
symmetrization axis, interpolated linearly between breakpoints.  Superlevel
sets of such a profile are exact finite unions of open intervals, which is
what makes the interval flow applicable without any root-finding tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .intervals import Interval, IntervalUnion, evolve
from .validation import ValidationError, check_nonnegative_time, check_positive

__all__ = [
    "LevelLadder",
    "SectionProfile",
    "cst_section",
    "measure_above",
    "rearranged_values",
    "superlevel_set",
    "superlevel_sets",
]


@dataclass(frozen=True)
class SectionProfile:
    """Breakpoints and heights of a piecewise-linear, compactly supported profile."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or y.ndim != 1 or x.size != y.size or x.size < 2:
            raise ValidationError("profile needs matching 1-d breakpoint and height arrays")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise ValidationError("profile data must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValidationError("breakpoints must be strictly increasing")
        if y.min() < 0:
            raise ValidationError("heights must be nonnegative")
        if y[0] != 0.0 or y[-1] != 0.0:
            raise ValidationError("profile must vanish at both ends")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_samples(cls, coords: np.ndarray, values: np.ndarray, trim: bool = True) -> "SectionProfile":
        coords = np.asarray(coords, dtype=float)
        values = np.asarray(values, dtype=float)
        if trim:
            nz = np.flatnonzero(values)
            if nz.size == 0:
                raise ValidationError("cannot build a profile from an identically zero section")
            lo = max(nz[0] - 1, 0)
            hi = min(nz[-1] + 1, values.size - 1)
            coords = coords[lo : hi + 1]
            values = values[lo : hi + 1]
        return cls(coords, values)

    @property
    def sup(self) -> float:
        return float(self.y.max())

    def evaluate(self, xq: np.ndarray) -> np.ndarray:
        return np.interp(xq, self.x, self.y, left=0.0, right=0.0)

    def support_union(self) -> IntervalUnion:
        return superlevel_set(self, 0.0, _allow_zero=True)


@dataclass(frozen=True)
class LevelLadder:
    """Strictly increasing positive levels used to discretize the layer cake."""

    levels: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float)
        if lv.ndim != 1 or lv.size == 0:
            raise ValidationError("a ladder needs a 1-d nonempty level array")
        if lv[0] <= 0 or np.any(np.diff(lv) <= 0):
            raise ValidationError("levels must be positive and strictly increasing")
        lv.setflags(write=False)
        object.__setattr__(self, "levels", lv)

    @property
    def count(self) -> int:
        return int(self.levels.size)

    @classmethod
    def uniform(cls, sup: float, count: int) -> "LevelLadder":
        """Midpoint ladder on (0, sup): levels (k - 1/2) sup / count."""
        sup = check_positive(sup, "sup")
        count = int(count)
        if count < 1:
            raise ValidationError("level count must be >= 1")
        k = np.arange(1, count + 1)
        return cls((k - 0.5) * (sup / count))

    @classmethod
    def for_values(cls, values: np.ndarray, count: int) -> "LevelLadder":
        """Uniform ladder for a sampled function, nudged off plateau heights.

        A level that exactly equals a sampled value would make the strict
        superlevel set drop a plateau of positive measure; such levels are
        moved one ulp downward.  For each detected plateau (a value repeated
        on many nodes) the nearest level below is snapped onto the plateau
        minus one ulp, so plateaus are reconstructed at their exact height
        instead of at whatever distance the uniform grid happens to leave.
        """
        values = np.asarray(values, dtype=float)
        sup = float(values.max())
        base = cls.uniform(sup, count).levels.copy()
        distinct, counts = np.unique(values, return_counts=True)
        # A plateau must carry real area; small repeat counts are grid
        # symmetries, and snapping levels onto those would wreck uniformity.
        plateaus = distinct[(counts >= max(8, values.size // 200)) & (distinct > 0)]
        for height in plateaus:
            idx = np.searchsorted(base, height, side="right") - 1
            if idx >= 0:
                base[idx] = np.nextafter(height, -np.inf)
        hit = np.isin(base, distinct)
        if hit.any():
            base[hit] = np.nextafter(base[hit], -np.inf)
        for i in range(1, base.size):
            if base[i] <= base[i - 1]:
                base[i] = np.nextafter(base[i - 1], np.inf)
        return cls(base)


def _crossings(profile: SectionProfile, c: float) -> np.ndarray:
    """Sorted boundary points of the open set {profile > c}, paired (in, out)."""
    x, y = profile.x, profile.y
    above = y > c
    flips = np.flatnonzero(above[1:] != above[:-1])
    if flips.size == 0:
        return np.empty((0, 2))
    dy = y[flips + 1] - y[flips]
    xs = x[flips] + (c - y[flips]) * (x[flips + 1] - x[flips]) / dy
    return xs.reshape(-1, 2)


def superlevel_set(profile: SectionProfile, c: float, _allow_zero: bool = False) -> IntervalUnion:
    """The exact open set ``{profile > c}`` as a union of disjoint open intervals."""
    if not _allow_zero:
        c = check_positive(c, "c")
    if c >= profile.sup:
        return IntervalUnion([], openness="open")
    pairs = _crossings(profile, c)
    starts, ends = pairs[:, 0], pairs[:, 1]
    if starts.size > 1:
        # An interior breakpoint sitting exactly at the level splits the open
        # set by a single point; that point is null, so fuse the pieces.
        keep = starts[1:] > ends[:-1]
        starts = np.concatenate([starts[:1], starts[1:][keep]])
        ends = np.concatenate([ends[:-1][keep], ends[-1:]])
    return IntervalUnion.from_endpoint_pairs(starts, ends, openness="open")


def superlevel_sets(profile: SectionProfile, levels: np.ndarray) -> list[IntervalUnion]:
    return [superlevel_set(profile, float(c)) for c in levels]


def measure_above(profile: SectionProfile, c) -> np.ndarray:
    """Lengths of ``{profile > c}`` for an array of levels (strict inequality)."""
    c = np.atleast_1d(np.asarray(c, dtype=float))[:, None]
    x, y = profile.x, profile.y
    x0, x1 = x[:-1], x[1:]
    y0, y1 = y[:-1], y[1:]
    dx = x1 - x0
    ylo = np.minimum(y0, y1)
    yhi = np.maximum(y0, y1)
    flat = yhi == ylo
    denom = np.where(flat, 1.0, yhi - ylo)
    frac = np.clip((yhi - c) / denom, 0.0, 1.0)
    frac = np.where(flat, (ylo > c).astype(float), frac)
    return (frac * dx).sum(axis=1)


def rearranged_values(profile: SectionProfile, xq: np.ndarray) -> np.ndarray:
    """The symmetric decreasing rearrangement of the profile, exactly, at ``xq``.

    Uses the layer-cake formula: the rearranged value at x is the largest
    level whose superlevel set is longer than 2|x|.  The distribution function
    is piecewise affine in the level with breakpoints at the profile heights,
    so the inversion is exact.
    """
    heights = np.unique(profile.y)
    if heights[0] != 0.0:
        heights = np.concatenate([[0.0], heights])
    m_at = measure_above(profile, heights)  # right-limits (strict measure)
    sup = heights[-1]

    targets = 2.0 * np.abs(np.asarray(xq, dtype=float))
    out = np.zeros_like(targets)
    alive = targets < m_at[0]
    if not alive.any():
        return out

    # Largest band index j with m(H_j) > target; the answer lies in
    # (H_j, H_{j+1}] for that band.
    j = np.searchsorted(-m_at, -targets[alive], side="left") - 1
    j = np.clip(j, 0, heights.size - 2)
    h_lo = heights[j]
    h_hi = heights[j + 1]
    # Two interior samples pin the affine piece of m on each band.
    ca = h_lo + 0.25 * (h_hi - h_lo)
    cb = h_lo + 0.75 * (h_hi - h_lo)
    ma = measure_above(profile, ca)
    mb = measure_above(profile, cb)
    degenerate = mb == ma
    span = np.where(cb > ca, cb - ca, 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        m_hi = ma + (mb - ma) * (h_hi - ca) / span
        solved = ca + (targets[alive] - ma) * span / np.where(degenerate, 1.0, mb - ma)
    vals = np.where(m_hi > targets[alive], h_hi, np.where(degenerate, h_hi, solved))
    out[alive] = np.clip(vals, 0.0, sup)
    return out


def cst_section(profile: SectionProfile, t: float, ladder: LevelLadder) -> SectionProfile:
    """Continuous symmetrization of one section through the level ladder.

    Each ladder level's superlevel set is evolved exactly by the interval
    flow; the section is rebuilt as the piecewise-linear interpolant through
    the evolved boundary points, anchored at the evolved support endpoints.
    """
    t = check_nonnegative_time(t)
    sup = profile.sup
    if sup == 0.0:
        return profile

    xs_parts: list[np.ndarray] = []
    hs_parts: list[np.ndarray] = []

    support = evolve(profile.support_union(), t)
    for iv in support:
        xs_parts.append(np.array([iv.left, iv.right]))
        hs_parts.append(np.zeros(2))

    active = ladder.levels[ladder.levels < sup]
    for c in active:
        evolved = evolve(superlevel_set(profile, float(c)), t)
        if evolved.is_empty:
            continue
        pts = evolved.endpoints()
        xs_parts.append(pts)
        hs_parts.append(np.full(pts.size, c))

    xs = np.concatenate(xs_parts)
    hs = np.concatenate(hs_parts)
    order = np.lexsort((-hs, xs))
    xs, hs = xs[order], hs[order]
    keep = np.ones(xs.size, dtype=bool)
    keep[1:] = xs[1:] > xs[:-1]  # duplicate positions resolve to the top level
    xs, hs = xs[keep], hs[keep]

    pad = 1e-9 * max(1.0, xs[-1] - xs[0])
    if hs[0] != 0.0:
        xs = np.concatenate([[xs[0] - pad], xs])
        hs = np.concatenate([[0.0], hs])
    if hs[-1] != 0.0:
        xs = np.concatenate([xs, [xs[-1] + pad]])
        hs = np.concatenate([hs, [0.0]])
    return SectionProfile(xs, hs)
