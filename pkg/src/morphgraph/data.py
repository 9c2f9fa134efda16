"""PBM image files and the synthetic noisy-shape corpus.

The corpus generator stands in for a scanned digit set: clean shapes
(random rectangle/disc unions, or scaled 5x7 glyph masks), their internal
morphological boundary as target, and salt-and-pepper noise on the input.
Per-pair seeds go into the manifest so any corpus can be regenerated
exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Iterable

from .errors import ConfigError, DataFormatError
from .grid import PixelSet
from .image import BinaryImage, erode
from .train import SamplePair

CROSS4 = PixelSet.of([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)])


def read_pbm(path) -> BinaryImage:
    """Read a P1 (ASCII) or P4 (packed) PBM file; 1 is foreground."""
    raw = Path(path).read_bytes()
    if raw[:2] not in (b"P1", b"P4"):
        raise DataFormatError(f"{path}: not a PBM file (magic {raw[:2]!r} at byte 0)")
    magic = raw[:2]
    pos = 2

    def skip_space(pos: int) -> int:
        while pos < len(raw):
            c = raw[pos:pos + 1]
            if c == b"#":
                while pos < len(raw) and raw[pos:pos + 1] != b"\n":
                    pos += 1
            elif c.isspace():
                pos += 1
            else:
                break
        return pos

    def read_int(pos: int) -> tuple[int, int]:
        pos = skip_space(pos)
        start = pos
        while pos < len(raw) and raw[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise DataFormatError(f"{path}: expected an integer at byte {start}")
        return int(raw[start:pos]), pos

    width, pos = read_int(pos)
    height, pos = read_int(pos)
    if width < 1 or height < 1:
        raise DataFormatError(f"{path}: bad dimensions {width}x{height}")

    bits = 0
    if magic == b"P1":
        count = 0
        pos = skip_space(pos)
        while pos < len(raw) and count < width * height:
            c = raw[pos:pos + 1]
            if c in b"01":
                if c == b"1":
                    bits |= 1 << count
                count += 1
                pos += 1
            elif c.isspace():
                pos = skip_space(pos)
            elif c == b"#":
                pos = skip_space(pos)
            else:
                raise DataFormatError(f"{path}: unexpected byte {c!r} at byte {pos}")
        if count != width * height:
            raise DataFormatError(
                f"{path}: truncated at byte {pos}: {count} of {width * height} pixels")
    else:
        if pos >= len(raw) or not raw[pos:pos + 1].isspace():
            raise DataFormatError(f"{path}: missing whitespace before raster at byte {pos}")
        pos += 1
        row_bytes = (width + 7) // 8
        need = row_bytes * height
        if len(raw) - pos < need:
            raise DataFormatError(
                f"{path}: truncated raster at byte {len(raw)}: need {need} bytes")
        for y in range(height):
            row = raw[pos + y * row_bytes: pos + (y + 1) * row_bytes]
            for x in range(width):
                if (row[x // 8] >> (7 - x % 8)) & 1:
                    bits |= 1 << (y * width + x)
    return BinaryImage(width, height, bits)


def write_pbm(img: BinaryImage, path, binary: bool = True) -> None:
    """Write a PBM file, P4 by default, P1 when binary=False."""
    p = Path(path)
    if binary:
        row_bytes = (img.width + 7) // 8
        out = bytearray(f"P4\n{img.width} {img.height}\n".encode())
        for y in range(img.height):
            row = bytearray(row_bytes)
            for x in range(img.width):
                if img.get(x, y):
                    row[x // 8] |= 1 << (7 - x % 8)
            out.extend(row)
        p.write_bytes(bytes(out))
    else:
        lines = [f"P1\n{img.width} {img.height}"]
        for y in range(img.height):
            lines.append("".join("1" if img.get(x, y) else "0" for x in range(img.width)))
        p.write_text("\n".join(lines) + "\n")


def boundary_target(x: BinaryImage, se: PixelSet = CROSS4, external: bool = False) -> BinaryImage:
    """Morphological boundary: internal (x minus its erosion) by default."""
    if external:
        from .image import dilate
        return dilate(x, se).minus(x)
    return x.minus(erode(x, se))


def add_noise(x: BinaryImage, rate: float, rng: random.Random) -> BinaryImage:
    """Flip each pixel independently with the given probability."""
    if not 0 <= rate < 0.5:
        raise ConfigError(f"noise rate must be in [0, 0.5), got {rate}")
    if rate == 0:
        return x
    flips = 0
    for i in range(x.width * x.height):
        if rng.random() < rate:
            flips |= 1 << i
    return BinaryImage(x.width, x.height, x.bits ^ flips)


@dataclass(frozen=True)
class CorpusSpec:
    count: int
    width: int = 56
    height: int = 56
    noise_rate: float = 0.05
    shape_kind: str = "blobs"
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("corpus count must be >= 1")
        if not 0 <= self.noise_rate < 0.5:
            raise ConfigError("noise_rate must be in [0, 0.5)")
        if self.shape_kind not in ("blobs", "digits-font"):
            raise ConfigError(f"unknown shape kind {self.shape_kind!r}")


# 5x7 glyph masks for digits 0-9, row strings top to bottom.
_GLYPHS = [
    ("01110", "10001", "10011", "10101", "11001", "10001", "01110"),
    ("00100", "01100", "00100", "00100", "00100", "00100", "01110"),
    ("01110", "10001", "00001", "00110", "01000", "10000", "11111"),
    ("11111", "00010", "00100", "00110", "00001", "10001", "01110"),
    ("00010", "00110", "01010", "10010", "11111", "00010", "00010"),
    ("11111", "10000", "11110", "00001", "00001", "10001", "01110"),
    ("00110", "01000", "10000", "11110", "10001", "10001", "01110"),
    ("11111", "00001", "00010", "00100", "01000", "01000", "01000"),
    ("01110", "10001", "10001", "01110", "10001", "10001", "01110"),
    ("01110", "10001", "10001", "01111", "00001", "00010", "01100"),
]


def _clean_shape(spec: CorpusSpec, index: int, rng: random.Random) -> BinaryImage:
    w, h = spec.width, spec.height
    if spec.shape_kind == "digits-font":
        scale = max(1, min((w - 8) // 5, (h - 8) // 7))
        glyph = _GLYPHS[index % 10]
        gw, gh = 5 * scale, 7 * scale
        x0 = (w - gw) // 2 + rng.randint(-2, 2)
        y0 = (h - gh) // 2 + rng.randint(-2, 2)
        pts = []
        for gy, row in enumerate(glyph):
            for gx, ch in enumerate(row):
                if ch == "1":
                    for sy in range(scale):
                        for sx in range(scale):
                            pts.append((x0 + gx * scale + sx, y0 + gy * scale + sy))
        return BinaryImage.from_points(w, h, pts, clip=True)

    bits = BinaryImage.empty(w, h)
    margin = 4
    for _ in range(rng.randint(2, 4)):
        rw = rng.randint(8, max(9, w // 2))
        rh = rng.randint(8, max(9, h // 2))
        x0 = rng.randint(margin, max(margin, w - margin - rw))
        y0 = rng.randint(margin, max(margin, h - margin - rh))
        pts = [(x, y) for y in range(y0, min(y0 + rh, h)) for x in range(x0, min(x0 + rw, w))]
        bits = bits | BinaryImage.from_points(w, h, pts)
    for _ in range(rng.randint(1, 2)):
        r = rng.randint(4, max(5, min(w, h) // 5))
        cx = rng.randint(margin + r, w - margin - r)
        cy = rng.randint(margin + r, h - margin - r)
        pts = [(x, y) for y in range(cy - r, cy + r + 1) for x in range(cx - r, cx + r + 1)
               if (x - cx) ** 2 + (y - cy) ** 2 <= r * r]
        bits = bits | BinaryImage.from_points(w, h, pts, clip=True)
    return bits


def gen_pairs(spec: CorpusSpec) -> tuple[list[SamplePair], list[int]]:
    """Generate pairs in memory; returns (pairs, per-pair seeds)."""
    master = random.Random(spec.seed)
    seeds = [master.randrange(1 << 62) for _ in range(spec.count)]
    pairs = []
    for i, s in enumerate(seeds):
        rng = random.Random(s)
        clean = _clean_shape(spec, i, rng)
        target = boundary_target(clean)
        noisy = add_noise(clean, spec.noise_rate, rng)
        pairs.append(SamplePair(noisy, target))
    return pairs, seeds


def gen_corpus(spec: CorpusSpec, out_dir) -> dict:
    """Write PBM pairs plus a manifest; returns the manifest dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pairs, seeds = gen_pairs(spec)
    files = []
    for i, (pair, s) in enumerate(zip(pairs, seeds)):
        in_name = f"input_{i:03d}.pbm"
        tg_name = f"target_{i:03d}.pbm"
        write_pbm(pair.input, out / in_name)
        write_pbm(pair.target, out / tg_name)
        files.append({"input": in_name, "target": tg_name, "seed": s})
    manifest = {"spec": asdict(spec), "files": files}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def load_pairs(data_dir) -> list[SamplePair]:
    """Load a corpus directory via its manifest, or by filename pairing."""
    d = Path(data_dir)
    if not d.is_dir():
        raise DataFormatError(f"{data_dir}: not a directory")
    manifest = d / "manifest.json"
    entries: list[tuple[Path, Path]] = []
    if manifest.exists():
        try:
            data = json.loads(manifest.read_text())
            for item in data["files"]:
                entries.append((d / item["input"], d / item["target"]))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise DataFormatError(f"{manifest}: malformed manifest: {e}") from e
    else:
        for inp in sorted(d.glob("input_*.pbm")):
            tgt = d / inp.name.replace("input_", "target_")
            if not tgt.exists():
                raise DataFormatError(f"{inp}: missing matching target {tgt.name}")
            entries.append((inp, tgt))
    if not entries:
        raise DataFormatError(f"{data_dir}: no image pairs found")
    pairs = []
    for inp, tgt in entries:
        a, b = read_pbm(inp), read_pbm(tgt)
        if not a.same_frame(b):
            raise DataFormatError(f"{inp} and {tgt} have different dimensions")
        pairs.append(SamplePair(a, b))
    return pairs
