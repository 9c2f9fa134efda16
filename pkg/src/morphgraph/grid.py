"""Integer grid points, finite pixel sets, and their textual 0/1 grid form.

The canonical ordering used everywhere in this package is row-major:
ascending (y, x). Textual grids mark the origin cell with 'o' (origin not
in the set) or 'O' (origin in the set); other cells are '0' or '1'.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import GridParseError


class Point(NamedTuple):
    x: int
    y: int

    def __add__(self, other) -> "Point":  # type: ignore[override]
        return Point(self.x + other[0], self.y + other[1])

    def __sub__(self, other) -> "Point":
        return Point(self.x - other[0], self.y - other[1])

    def __neg__(self) -> "Point":
        return Point(-self.x, -self.y)


ORIGIN = Point(0, 0)


def row_major_key(p: Point) -> tuple[int, int]:
    return (p.y, p.x)


@dataclass(frozen=True)
class PixelSet:
    """Immutable finite set of grid points."""

    points: frozenset[Point]

    @classmethod
    def of(cls, points: Iterable[tuple[int, int]]) -> "PixelSet":
        return cls(frozenset(Point(int(x), int(y)) for x, y in points))

    @classmethod
    def empty(cls) -> "PixelSet":
        return _EMPTY

    @cached_property
    def sorted_points(self) -> tuple[Point, ...]:
        return tuple(sorted(self.points, key=row_major_key))

    def __iter__(self) -> Iterator[Point]:
        return iter(self.sorted_points)

    def __len__(self) -> int:
        return len(self.points)

    def __bool__(self) -> bool:
        return bool(self.points)

    def __contains__(self, p) -> bool:
        return Point(p[0], p[1]) in self.points

    def __or__(self, other: "PixelSet") -> "PixelSet":
        return PixelSet(self.points | other.points)

    def __and__(self, other: "PixelSet") -> "PixelSet":
        return PixelSet(self.points & other.points)

    def __sub__(self, other: "PixelSet") -> "PixelSet":
        return PixelSet(self.points - other.points)

    def issubset(self, other: "PixelSet") -> bool:
        return self.points <= other.points

    def translate(self, h: tuple[int, int]) -> "PixelSet":
        return PixelSet(frozenset(p + h for p in self.points))

    def transpose(self) -> "PixelSet":
        """Pointwise negation of every offset."""
        return PixelSet(frozenset(-p for p in self.points))

    def minkowski(self, other: "PixelSet") -> "PixelSet":
        return PixelSet(frozenset(a + b for a in self.points for b in other.points))

    def bounding_box(self) -> tuple[int, int, int, int] | None:
        """(min_x, min_y, max_x, max_y) inclusive, or None when empty."""
        if not self.points:
            return None
        xs = [p.x for p in self.points]
        ys = [p.y for p in self.points]
        return (min(xs), min(ys), max(xs), max(ys))

    def __repr__(self) -> str:
        inner = ", ".join(f"({p.x},{p.y})" for p in self.sorted_points)
        return f"PixelSet{{{inner}}}"


_EMPTY = PixelSet(frozenset())


def render_grid(ps: PixelSet, bounds: tuple[int, int, int, int] | None = None) -> list[str]:
    """Render a pixel set as 0/1 rows; the origin cell reads 'o' or 'O'.

    Default bounds are the bounding box of the points together with the
    origin, so the rendering is always parseable back.
    """
    if bounds is None:
        box = (ps | PixelSet.of([ORIGIN])).bounding_box()
        assert box is not None
        bounds = box
    min_x, min_y, max_x, max_y = bounds
    if not (min_x <= 0 <= max_x and min_y <= 0 <= max_y):
        raise ValueError("grid bounds must include the origin")
    rows = []
    for y in range(min_y, max_y + 1):
        chars = []
        for x in range(min_x, max_x + 1):
            inside = (x, y) in ps
            if (x, y) == (0, 0):
                chars.append("O" if inside else "o")
            else:
                chars.append("1" if inside else "0")
        rows.append("".join(chars))
    return rows


def parse_grid(rows: Sequence[str]) -> PixelSet:
    """Parse rows produced by render_grid back into a pixel set."""
    if not rows:
        raise GridParseError("empty grid")
    width = len(rows[0])
    origin: tuple[int, int] | None = None
    cells: list[tuple[int, int, str]] = []
    for ry, row in enumerate(rows):
        if len(row) != width:
            raise GridParseError(f"ragged grid: row {ry} has length {len(row)}, expected {width}")
        for rx, ch in enumerate(row):
            if ch not in "01oO":
                raise GridParseError(f"bad cell {ch!r} at row {ry}, column {rx}")
            if ch in "oO":
                if origin is not None:
                    raise GridParseError(f"duplicate origin marker at row {ry}, column {rx}")
                origin = (rx, ry)
            cells.append((rx, ry, ch))
    if origin is None:
        raise GridParseError("grid has no origin marker 'o'/'O'")
    ox, oy = origin
    points = [(rx - ox, ry - oy) for rx, ry, ch in cells if ch in "1O"]
    return PixelSet.of(points)
