"""Binary images on a finite frame and the elementary window operators.

An image is a single integer: bit y*width + x is the pixel at (x, y).
Everything outside the frame reads as 0. Translation is one big shift plus
a column mask that stops rows from wrapping, so erosion and dilation by a
k-point structuring element cost k shifted bitwise ops regardless of frame
size. Complement is frame-relative, which breaks exact translation
invariance at the border; law-style guarantees are therefore stated on
interior pixels.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from .grid import ORIGIN, PixelSet, Point
from .lattice import BooleanFn, Interval, table_bits

# A structuring element is just a set of offsets.
StructElem = PixelSet


@lru_cache(maxsize=None)
def _frame_mask(width: int, height: int) -> int:
    return (1 << (width * height)) - 1


@lru_cache(maxsize=None)
def _column_mask(width: int, height: int, dx: int) -> int:
    """Pixels whose source column under a shift by dx stays in the frame."""
    lo = max(0, dx)
    hi = min(width, width + dx)
    if lo >= hi:
        return 0
    row = ((1 << (hi - lo)) - 1) << lo
    reps = _frame_mask(width, height) // ((1 << width) - 1)
    return row * reps


def _shifted(bits: int, width: int, height: int, dx: int, dy: int) -> int:
    s = dy * width + dx
    v = bits << s if s >= 0 else bits >> -s
    return v & _column_mask(width, height, dx) & _frame_mask(width, height)


@dataclass(frozen=True)
class BinaryImage:
    width: int
    height: int
    bits: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("frame dimensions must be positive")
        if self.bits & ~_frame_mask(self.width, self.height):
            raise ValueError("bits outside the frame")

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryImage":
        return cls(width, height, 0)

    @classmethod
    def full(cls, width: int, height: int) -> "BinaryImage":
        return cls(width, height, _frame_mask(width, height))

    @classmethod
    def from_points(cls, width: int, height: int, points: Iterable[tuple[int, int]],
                    clip: bool = False) -> "BinaryImage":
        bits = 0
        for x, y in points:
            if 0 <= x < width and 0 <= y < height:
                bits |= 1 << (y * width + x)
            elif not clip:
                raise ValueError(f"point ({x},{y}) outside {width}x{height} frame")
        return cls(width, height, bits)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "BinaryImage":
        a = np.asarray(arr, dtype=bool)
        h, w = a.shape
        flat = a.reshape(-1)
        packed = np.packbits(flat, bitorder="little")
        return cls(w, h, int.from_bytes(packed.tobytes(), "little"))

    def to_array(self) -> np.ndarray:
        n = self.width * self.height
        raw = self.bits.to_bytes((n + 7) // 8, "little")
        flat = np.unpackbits(np.frombuffer(raw, np.uint8), bitorder="little")[:n]
        return flat.reshape(self.height, self.width).astype(bool)

    def get(self, x: int, y: int) -> int:
        if not (0 <= x < self.width and 0 <= y < self.height):
            return 0
        return (self.bits >> (y * self.width + x)) & 1

    def pixels(self) -> Iterator[Point]:
        bits = self.bits
        w = self.width
        while bits:
            low = bits & -bits
            bits ^= low
            i = low.bit_length() - 1
            yield Point(i % w, i // w)

    def count(self) -> int:
        return self.bits.bit_count()

    def same_frame(self, other: "BinaryImage") -> bool:
        return self.width == other.width and self.height == other.height

    def _require_frame(self, other: "BinaryImage") -> None:
        if not self.same_frame(other):
            raise ValueError("frame dimensions differ")

    def __or__(self, other: "BinaryImage") -> "BinaryImage":
        self._require_frame(other)
        return BinaryImage(self.width, self.height, self.bits | other.bits)

    def __and__(self, other: "BinaryImage") -> "BinaryImage":
        self._require_frame(other)
        return BinaryImage(self.width, self.height, self.bits & other.bits)

    def __xor__(self, other: "BinaryImage") -> "BinaryImage":
        self._require_frame(other)
        return BinaryImage(self.width, self.height, self.bits ^ other.bits)

    def minus(self, other: "BinaryImage") -> "BinaryImage":
        self._require_frame(other)
        return BinaryImage(self.width, self.height, self.bits & ~other.bits)

    def issubset(self, other: "BinaryImage") -> bool:
        self._require_frame(other)
        return self.bits & ~other.bits == 0

    def __bool__(self) -> bool:
        return self.bits != 0

    def __repr__(self) -> str:
        return f"BinaryImage({self.width}x{self.height}, {self.count()} px)"


def translate(x: BinaryImage, h: tuple[int, int]) -> BinaryImage:
    """Shift content by h; anything pushed past the frame is lost."""
    return BinaryImage(x.width, x.height, _shifted(x.bits, x.width, x.height, h[0], h[1]))


def complement(x: BinaryImage) -> BinaryImage:
    """Bitwise negation within the frame."""
    return BinaryImage(x.width, x.height, x.bits ^ _frame_mask(x.width, x.height))


def dilate(x: BinaryImage, b: StructElem) -> BinaryImage:
    """Union of translates of x by the offsets of b (empty b gives empty)."""
    acc = 0
    for p in b:
        acc |= _shifted(x.bits, x.width, x.height, p.x, p.y)
    return BinaryImage(x.width, x.height, acc)


def erode(x: BinaryImage, b: StructElem) -> BinaryImage:
    """Pixel h survives iff h+p is set for every offset p of b.

    Reads outside the frame are 0; the empty structuring element yields the
    full frame (empty intersection).
    """
    acc = _frame_mask(x.width, x.height)
    for p in b:
        acc &= _shifted(x.bits, x.width, x.height, -p.x, -p.y)
    return BinaryImage(x.width, x.height, acc)


def opening(x: BinaryImage, b: StructElem) -> BinaryImage:
    return dilate(erode(x, b), b)


def closing(x: BinaryImage, b: StructElem) -> BinaryImage:
    return erode(dilate(x, b), b)


def asf_layer(x: BinaryImage, b: StructElem) -> BinaryImage:
    """One alternating-filter stage: closing after opening, same element."""
    return closing(opening(x, b), b)


def _anti_element(i: Interval) -> PixelSet:
    # Complement of the right end within the window, then transpose.
    return (i.window.support - i.right).transpose()


def sup_generating(x: BinaryImage, i: Interval) -> BinaryImage:
    """Pixels whose window view lies between the interval's two ends.

    Computed as erosion by the left end intersected with the complement of
    a dilation (the anti-dilation on the window complement of the right
    end); with zero reads outside the frame this matches the window-view
    definition at every frame pixel.
    """
    return erode(x, i.left).minus(dilate(x, _anti_element(i)))


def inf_generating(x: BinaryImage, i: Interval) -> BinaryImage:
    """Dual building block: dilation by the left end joined with the
    complement of an erosion on the transposed window complement."""
    return dilate(x, i.left) | complement(erode(x, _anti_element(i)))


def apply_boolean_fn(x: BinaryImage, f: BooleanFn) -> BinaryImage:
    """Slide the window over every frame pixel and look up f's table."""
    n = len(f.window)
    if n == 0:
        return BinaryImage.full(x.width, x.height) if f.table & 1 else BinaryImage.empty(x.width, x.height)
    idx = np.zeros((x.height, x.width), dtype=np.int64)
    for i, p in enumerate(f.window.points):
        plane = translate(x, (-p.x, -p.y)).to_array()
        idx |= plane.astype(np.int64) << i
    lut = table_bits(f.table, 1 << n)
    return BinaryImage.from_array(lut[idx].astype(bool))
