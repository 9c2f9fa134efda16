"""Interval algebra on the Boolean lattice of subsets of a finite window.

Representation notes. A window fixes a canonical row-major order of its
points; a subset of the window is the integer mask whose bit i is the i-th
point. A family of subsets (a kernel, or a truth table) is one bit per
subset: an integer of 2^n bits indexed by subset mask. All collection
operations reduce to shifts and bitwise ops on these integers.

The central algorithm, `maximal_intervals`, extracts the maximal closed
intervals [A, B] contained in a family. It runs a containment sweep over
free-point sets: C[m] is the bitset, indexed by A, telling whether the whole
interval [A, A | m] lies inside the family. C obeys

    C[m] = C[m \\ p] & (C[m \\ p] >> p)      for any point bit p of m,

because [A, A|m] is inside iff both halves [A, A|m\\p] and [A|p, A|m] are.
An interval is maximal iff no one-point widening (drop a point from A, or
add an outside point to B) stays inside, which is another bitset sweep.
Time and memory are O(4^n) bit operations, so extraction is capped.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Iterator

import numpy as np

from .errors import WindowCapExceeded
from .grid import ORIGIN, PixelSet, Point, row_major_key

# Hard cap on |W| for explicit truth tables (2^|W| bits).
TABLE_CAP = 24
# Cap on |W| for maximal-interval extraction (O(4^|W|) bits).
EXTRACTION_CAP = 14


@dataclass(frozen=True)
class Window:
    """A finite set of offsets with a canonical point order."""

    support: PixelSet

    @classmethod
    def of(cls, points: Iterable[tuple[int, int]]) -> "Window":
        return cls(PixelSet.of(points))

    @classmethod
    def origin(cls) -> "Window":
        return cls(PixelSet.of([ORIGIN]))

    @cached_property
    def points(self) -> tuple[Point, ...]:
        return self.support.sorted_points

    @cached_property
    def _index(self) -> dict[Point, int]:
        return {p: i for i, p in enumerate(self.points)}

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, p) -> bool:
        return p in self.support

    @property
    def full_mask(self) -> int:
        return (1 << len(self.points)) - 1

    def mask_of(self, ps: PixelSet) -> int:
        idx = self._index
        mask = 0
        for p in ps.points:
            i = idx.get(p)
            if i is None:
                raise ValueError(f"point ({p.x},{p.y}) is not in the window")
            mask |= 1 << i
        return mask

    def subset(self, mask: int) -> PixelSet:
        pts = self.points
        out = []
        while mask:
            low = mask & -mask
            out.append(pts[low.bit_length() - 1])
            mask ^= low
        return PixelSet(frozenset(out))

    def union(self, other: "Window") -> "Window":
        return Window(self.support | other.support)

    def minkowski(self, other: "Window") -> "Window":
        return Window(self.support.minkowski(other.support))

    def transpose(self) -> "Window":
        return Window(self.support.transpose())

    def translate(self, h) -> "Window":
        return Window(self.support.translate(h))

    def issuperset(self, other: "Window") -> bool:
        return other.support.issubset(self.support)

    def remap_to(self, bigger: "Window") -> tuple[int, ...]:
        """Bit value in `bigger` for each point of self, in self's order."""
        idx = bigger._index
        try:
            return tuple(1 << idx[p] for p in self.points)
        except KeyError as e:
            raise ValueError(f"window is not contained in the target window: {e}") from e

    def __repr__(self) -> str:
        return f"Window({self.support!r})"


@dataclass(frozen=True)
class Interval:
    """Closed interval [left, right] of subsets of a window."""

    window: Window
    left: PixelSet
    right: PixelSet

    def __post_init__(self):
        if not self.left.issubset(self.right):
            raise ValueError("invalid interval: left end is not a subset of the right end")
        if not self.right.issubset(self.window.support):
            raise ValueError("invalid interval: right end is not within the window")

    @cached_property
    def left_mask(self) -> int:
        return self.window.mask_of(self.left)

    @cached_property
    def right_mask(self) -> int:
        return self.window.mask_of(self.right)

    def contains(self, x: PixelSet) -> bool:
        if not x.issubset(self.window.support):
            raise ValueError("set is outside the interval's window")
        return self.left.issubset(x) and x.issubset(self.right)

    def __repr__(self) -> str:
        return f"Interval[{self.left!r}, {self.right!r}]"


def interval_contains(i: Interval, x: PixelSet) -> bool:
    """True iff left <= x <= right; x must live inside i's window."""
    return i.contains(x)


@dataclass(frozen=True)
class IntervalCollection:
    """Antichain of maximal intervals over one shared window.

    Equality is representation equality: same window, same sorted intervals.
    Use `of` to build from untrusted input (it checks the antichain
    property); internal algorithms construct trusted instances directly.
    """

    window: Window
    intervals: tuple[Interval, ...]

    @classmethod
    def of(cls, window: Window, intervals: Iterable[Interval]) -> "IntervalCollection":
        ivs = list(intervals)
        for iv in ivs:
            if iv.window != window:
                raise ValueError("all intervals must share the collection's window")
        pairs = sorted(set((iv.left_mask, iv.right_mask) for iv in ivs))
        for ia, (a1, b1) in enumerate(pairs):
            for a2, b2 in pairs[ia + 1:]:
                # [a2,b2] inside [a1,b1] iff a1 <= a2 and b2 <= b1 (as sets).
                if (a1 & a2) == a1 and (b2 | b1) == b1:
                    raise ValueError("not an antichain: one interval contains another")
                if (a2 & a1) == a2 and (b1 | b2) == b2:
                    raise ValueError("not an antichain: one interval contains another")
        return _collection_from_pairs(window, pairs)

    @classmethod
    def empty(cls, window: Window) -> "IntervalCollection":
        return cls(window, ())

    @classmethod
    def top(cls, window: Window) -> "IntervalCollection":
        return cls(window, (Interval(window, PixelSet.empty(), window.support),))

    def mask_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((iv.left_mask, iv.right_mask) for iv in self.intervals)

    @cached_property
    def member_table(self) -> int:
        """Bitset over subset masks: which subsets lie in some interval."""
        t = 0
        for iv in self.intervals:
            a = iv.left_mask
            t |= _subsets_pattern(iv.right_mask & ~a) << a
        return t

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __repr__(self) -> str:
        return f"IntervalCollection({len(self.intervals)} intervals over {len(self.window)} points)"


def _collection_from_pairs(window: Window, pairs: Iterable[tuple[int, int]]) -> IntervalCollection:
    ivs = tuple(
        Interval(window, window.subset(a), window.subset(b)) for a, b in sorted(pairs)
    )
    return IntervalCollection(window, ivs)


@dataclass(frozen=True)
class BooleanFn:
    """Truth table over all subsets of a window, packed as an integer."""

    window: Window
    table: int

    def __post_init__(self):
        n = len(self.window)
        if n > TABLE_CAP:
            raise WindowCapExceeded(n, TABLE_CAP, "boolean function window")
        if not 0 <= self.table < (1 << (1 << n)):
            raise ValueError("table does not fit the window's subset count")

    @classmethod
    def constant(cls, window: Window, value: int) -> "BooleanFn":
        size = 1 << len(window)
        return cls(window, ((1 << size) - 1) if value else 0)

    @classmethod
    def from_callable(cls, window: Window, fn: Callable[[PixelSet], int]) -> "BooleanFn":
        n = len(window)
        if n > TABLE_CAP:
            raise WindowCapExceeded(n, TABLE_CAP, "boolean function window")
        table = 0
        for mask in range(1 << n):
            if fn(window.subset(mask)):
                table |= 1 << mask
        return cls(window, table)

    def value_at_mask(self, mask: int) -> int:
        return (self.table >> mask) & 1

    def __call__(self, x: PixelSet) -> int:
        return self.value_at_mask(self.window.mask_of(x))


def table_bits(table: int, size: int) -> np.ndarray:
    """Expand a packed table into a uint8 0/1 array of the given length."""
    nbytes = (size + 7) // 8
    raw = table.to_bytes(nbytes, "little")
    return np.unpackbits(np.frombuffer(raw, np.uint8), bitorder="little")[:size]


def bits_to_table(bits: np.ndarray) -> int:
    packed = np.packbits(bits.astype(np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def _subsets_pattern(m: int) -> int:
    """Bitset over subset masks x with x <= m."""
    s = 1
    while m:
        p = m & -m
        m ^= p
        s |= s << p
    return s


@lru_cache(maxsize=None)
def _point_pattern(n: int, p: int) -> int:
    """Bitset over masks x in [0, 2^n) with point bit p set in x."""
    j = p.bit_length() - 1
    run = ((1 << (1 << j)) - 1) << (1 << j)
    period = 1 << (j + 1)
    reps = ((1 << (1 << n)) - 1) // ((1 << period) - 1)
    return run * reps


def _maximal_mask_pairs(table: int, n: int) -> list[tuple[int, int]]:
    """Maximal intervals, as sorted (left, right) mask pairs."""
    if table == 0:
        return []
    npoints = 1 << n
    contained = [0] * npoints
    contained[0] = table
    for m in range(1, npoints):
        p = m & -m
        c = contained[m ^ p]
        contained[m] = (c & (c >> p)) & ~_point_pattern(n, p)
    full = npoints - 1
    out: list[tuple[int, int]] = []
    for m in range(npoints):
        cm = contained[m]
        if not cm:
            continue
        dominated = 0
        rest = full & ~m
        while rest:
            p = rest & -rest
            rest ^= p
            cs = contained[m | p]
            dominated |= cs | (cs << p)
        good = cm & ~dominated
        while good:
            low = good & -good
            good ^= low
            a = low.bit_length() - 1
            out.append((a, a | m))
    out.sort()
    return out


def _check_extraction_size(window: Window) -> None:
    n = len(window)
    if n > EXTRACTION_CAP:
        raise WindowCapExceeded(n, EXTRACTION_CAP, "interval extraction window")


def maximal_intervals(kernel: BooleanFn) -> IntervalCollection:
    """All maximal closed intervals contained in {X : kernel(X) = 1}."""
    _check_extraction_size(kernel.window)
    pairs = _maximal_mask_pairs(kernel.table, len(kernel.window))
    return _collection_from_pairs(kernel.window, pairs)


def boolean_to_collection(f: BooleanFn) -> IntervalCollection:
    return maximal_intervals(f)


def collection_to_boolean(x: IntervalCollection) -> BooleanFn:
    return BooleanFn(x.window, x.member_table)


def _require_same_window(x: IntervalCollection, y: IntervalCollection) -> None:
    if x.window != y.window:
        raise ValueError("interval collections live on different windows")


def _collection_from_table(window: Window, table: int) -> IntervalCollection:
    _check_extraction_size(window)
    return _collection_from_pairs(window, _maximal_mask_pairs(table, len(window)))


def collection_inf(x: IntervalCollection, y: IntervalCollection) -> IntervalCollection:
    """Maximal intervals of the intersection of the represented families."""
    _require_same_window(x, y)
    return _collection_from_table(x.window, x.member_table & y.member_table)


def collection_sup(x: IntervalCollection, y: IntervalCollection) -> IntervalCollection:
    """Maximal intervals of the union of the represented families."""
    _require_same_window(x, y)
    return _collection_from_table(x.window, x.member_table | y.member_table)


def collection_complement(x: IntervalCollection) -> IntervalCollection:
    """Maximal intervals of the complementary family within P(W)."""
    size = 1 << len(x.window)
    full = (1 << size) - 1
    return _collection_from_table(x.window, x.member_table ^ full)


def dual_boolean(f: BooleanFn) -> BooleanFn:
    """f*(X) = 1 - f(W \\ X); an involution."""
    size = 1 << len(f.window)
    bits = table_bits(f.table, size)
    return BooleanFn(f.window, bits_to_table(1 - bits[::-1]))


def rewindow(b: IntervalCollection, w_new: Window) -> IntervalCollection:
    """The same operator's basis re-expressed over a larger window.

    Each [A, B] becomes [A, B | (w_new \\ w_old)]: the added points are
    free. Containment relations between intervals are unchanged, so the
    antichain survives without re-extraction.
    """
    if b.window == w_new:
        return b
    if not w_new.issuperset(b.window):
        raise ValueError("new window must contain the collection's window")
    remap = b.window.remap_to(w_new)
    ext = w_new.mask_of(w_new.support - b.window.support)
    pairs = []
    for iv in b.intervals:
        a = _remap_mask(iv.left_mask, remap)
        r = _remap_mask(iv.right_mask, remap) | ext
        pairs.append((a, r))
    return _collection_from_pairs(w_new, pairs)


def _remap_mask(mask: int, remap: tuple[int, ...]) -> int:
    out = 0
    while mask:
        low = mask & -mask
        mask ^= low
        out |= remap[low.bit_length() - 1]
    return out


def translate_collection(b: IntervalCollection, h) -> IntervalCollection:
    """Basis of the operator composed with translation by h.

    A basis over W becomes the same mask pairs over W - h; row-major point
    order is preserved by translation, so intervals map one to one.
    """
    w = b.window.translate(Point(-h[0], -h[1]))
    ivs = tuple(
        Interval(w, iv.left.translate((-h[0], -h[1])), iv.right.translate((-h[0], -h[1])))
        for iv in b.intervals
    )
    return IntervalCollection(w, ivs)


def set_neighbors(a: PixelSet, w: Window) -> list[PixelSet]:
    """All sets one point-flip away from `a` inside window `w`."""
    if not a.issubset(w.support):
        raise ValueError("set is not within the window")
    out = []
    for p in w.points:
        single = PixelSet(frozenset((p,)))
        out.append((a - single) if p in a else (a | single))
    return out


def interval_neighbors(i: Interval) -> list[Interval]:
    """All valid intervals one endpoint move away from `i`.

    Moves: drop a point from the left end, grow the left end into the gap,
    shrink the right end into the gap, or grow the right end into the
    window. Count: |A| + 2|B\\A| + |W\\B|. The move that would drop a left
    point from the right end is excluded (it would empty the interval).
    """
    w = i.window
    gap = i.right - i.left
    outside = w.support - i.right
    out = []
    for p in i.left:
        out.append(Interval(w, i.left - PixelSet.of([p]), i.right))
    for p in gap:
        out.append(Interval(w, i.left | PixelSet.of([p]), i.right))
    for p in gap:
        out.append(Interval(w, i.left, i.right - PixelSet.of([p])))
    for p in outside:
        out.append(Interval(w, i.left, i.right | PixelSet.of([p])))
    return out
