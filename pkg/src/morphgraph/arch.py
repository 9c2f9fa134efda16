"""Layered architectures, their parameter vectors, and the parameter lattice.

An architecture is a sequential list of layers compiled into an operator
graph. A parameter vector assigns each layer its structuring element or
its intervals; the vectors form a lattice ordered coordinatewise by
inclusion, and training walks between vectors at lattice distance one.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Union

from .errors import ConfigError, DataFormatError, GridParseError
from .grid import ORIGIN, PixelSet, parse_grid, render_grid
from .graph import (
    Asf,
    Closing,
    Complement,
    Dilation,
    Erosion,
    InfGen,
    Inf,
    Input,
    MCGraph,
    Opening,
    Output,
    Sup,
    SupGen,
    VertexKind,
)
from .lattice import Interval, Window, interval_neighbors, set_neighbors

SE_KINDS = ("erosion", "dilation", "opening", "closing", "asf")
GEN_KINDS = ("supgen", "infgen")
LAYER_KINDS = SE_KINDS + GEN_KINDS + ("complement",)

LayerParams = Union[PixelSet, tuple[Interval, ...], None]


def square_window(d: int) -> PixelSet:
    """Centered d x d square of offsets; d must be odd."""
    if d < 1 or d % 2 == 0:
        raise ConfigError(f"window side must be odd and positive, got {d}")
    r = (d - 1) // 2
    return PixelSet.of((x, y) for y in range(-r, r + 1) for x in range(-r, r + 1))


@dataclass(frozen=True)
class LayerSpec:
    """One layer: an operator kind plus its window (d x d square or explicit
    offsets) and, for combiner layers, the number of parallel vertices."""

    kind: str
    k: int = 1
    d: int | None = None
    window: PixelSet | None = None

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ConfigError(f"unknown layer kind {self.kind!r}")
        if self.k < 1:
            raise ConfigError("layer vertex count k must be >= 1")
        if self.kind not in GEN_KINDS and self.k != 1:
            raise ConfigError(f"layer kind {self.kind!r} does not take k")
        if self.kind == "complement":
            if self.d is not None or self.window is not None:
                raise ConfigError("complement layer takes no window")
            return
        if (self.d is None) == (self.window is None):
            raise ConfigError(f"layer {self.kind!r} needs exactly one of d or window")
        if self.d is not None:
            square_window(self.d)  # validates oddness
        if self.window is not None:
            if not self.window:
                raise ConfigError("explicit layer window must be non-empty")
            if ORIGIN not in self.window:
                raise ConfigError("explicit layer window must contain the origin")

    @cached_property
    def window_obj(self) -> Window:
        if self.kind == "complement":
            return Window.origin()
        if self.window is not None:
            return Window(self.window)
        assert self.d is not None
        return Window(square_window(self.d))

    @property
    def has_params(self) -> bool:
        return self.kind != "complement"


@dataclass(frozen=True)
class ArchitectureSpec:
    layers: tuple[LayerSpec, ...]

    def __post_init__(self):
        if not self.layers:
            raise ConfigError("architecture needs at least one layer")

    @classmethod
    def of(cls, layers: Iterable[LayerSpec]) -> "ArchitectureSpec":
        return cls(tuple(layers))

    def declared_window(self) -> Window:
        """Locality bound from the declared layer windows (not minimal)."""
        acc = Window.origin()
        for layer in self.layers:
            w = layer.window_obj.support
            if layer.kind == "erosion":
                own = w
            elif layer.kind == "dilation":
                own = w.transpose()
            elif layer.kind in ("opening", "closing"):
                own = w.minkowski(w.transpose())
            elif layer.kind == "asf":
                both = w.minkowski(w.transpose())
                own = both.minkowski(both)
            elif layer.kind == "supgen":
                own = w
            elif layer.kind == "infgen":
                own = w.transpose()
            else:
                own = PixelSet.of([ORIGIN])
            acc = acc.minkowski(Window(own))
        return acc

    def to_json(self) -> dict:
        return {"layers": [_layer_to_json(l) for l in self.layers]}

    @classmethod
    def from_json(cls, data: dict) -> "ArchitectureSpec":
        if not isinstance(data, dict) or "layers" not in data:
            raise ConfigError("architecture JSON must be an object with a 'layers' array")
        return cls(tuple(_layer_from_json(d, i) for i, d in enumerate(data["layers"])))


def _layer_to_json(layer: LayerSpec) -> dict:
    out: dict = {"kind": layer.kind}
    if layer.kind in GEN_KINDS:
        out["k"] = layer.k
    if layer.kind != "complement":
        if layer.window is not None:
            out["window"] = render_grid(layer.window)
        else:
            out["d"] = layer.d
    return out


def _layer_from_json(data: dict, index: int) -> LayerSpec:
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError(f"layer {index}: expected an object with a 'kind'")
    try:
        window = None
        if "window" in data:
            window = parse_grid(data["window"])
        return LayerSpec(
            kind=data["kind"],
            k=int(data.get("k", 1)),
            d=int(data["d"]) if "d" in data else None,
            window=window,
        )
    except (ConfigError, GridParseError, TypeError, ValueError) as e:
        raise ConfigError(f"layer {index}: {e}") from e


@dataclass(frozen=True)
class ParamVector:
    """One point of the parameter lattice: per-layer sets or intervals."""

    arch: ArchitectureSpec
    entries: tuple[LayerParams, ...]

    def __post_init__(self):
        if len(self.entries) != len(self.arch.layers):
            raise ConfigError(
                f"parameter vector has {len(self.entries)} entries for "
                f"{len(self.arch.layers)} layers"
            )
        for i, (layer, entry) in enumerate(zip(self.arch.layers, self.entries)):
            _check_entry(layer, entry, i)

    def replace(self, layer_index: int, entry: LayerParams) -> "ParamVector":
        entries = list(self.entries)
        entries[layer_index] = entry
        return ParamVector(self.arch, tuple(entries))


def _check_entry(layer: LayerSpec, entry: LayerParams, i: int) -> None:
    if layer.kind == "complement":
        if entry is not None:
            raise ConfigError(f"layer {i} (complement): expected no parameters")
    elif layer.kind in SE_KINDS:
        if not isinstance(entry, PixelSet):
            raise ConfigError(f"layer {i} ({layer.kind}): expected a structuring element")
        if not entry.issubset(layer.window_obj.support):
            raise ConfigError(f"layer {i} ({layer.kind}): structuring element outside the layer window")
    else:
        if not isinstance(entry, tuple) or len(entry) != layer.k:
            raise ConfigError(f"layer {i} ({layer.kind}): expected {layer.k} intervals")
        for j, iv in enumerate(entry):
            if not isinstance(iv, Interval) or iv.window != layer.window_obj:
                raise ConfigError(f"layer {i} ({layer.kind}): interval {j} is not over the layer window")


def compile(arch: ArchitectureSpec, params: ParamVector) -> MCGraph:
    """Compile an architecture and one parameter point into a graph."""
    if params.arch != arch:
        raise ConfigError("parameter vector does not match the architecture")
    vertices: list[VertexKind] = [Input()]
    edges: list[tuple[int, int]] = []
    prev = 0
    for layer, entry in zip(arch.layers, params.entries):
        if layer.kind == "complement":
            vertices.append(Complement())
            edges.append((prev, len(vertices) - 1))
            prev = len(vertices) - 1
        elif layer.kind in SE_KINDS:
            assert isinstance(entry, PixelSet)
            ctor = {
                "erosion": Erosion, "dilation": Dilation,
                "opening": Opening, "closing": Closing, "asf": Asf,
            }[layer.kind]
            vertices.append(ctor(entry))
            edges.append((prev, len(vertices) - 1))
            prev = len(vertices) - 1
        else:
            assert isinstance(entry, tuple)
            gen = SupGen if layer.kind == "supgen" else InfGen
            ids = []
            for iv in entry:
                vertices.append(gen(iv))
                ids.append(len(vertices) - 1)
                edges.append((prev, ids[-1]))
            if len(ids) == 1:
                prev = ids[0]
            else:
                vertices.append(Sup() if layer.kind == "supgen" else Inf())
                comb = len(vertices) - 1
                for i in ids:
                    edges.append((i, comb))
                prev = comb
    vertices.append(Output())
    edges.append((prev, len(vertices) - 1))
    return MCGraph.of(vertices, edges)


def param_neighbors(params: ParamVector) -> list[ParamVector]:
    """All vectors at lattice distance one: a single-coordinate move."""
    out: list[ParamVector] = []
    for i, (layer, entry) in enumerate(zip(params.arch.layers, params.entries)):
        if layer.kind == "complement":
            continue
        if layer.kind in SE_KINDS:
            assert isinstance(entry, PixelSet)
            for nb in set_neighbors(entry, layer.window_obj):
                out.append(params.replace(i, nb))
        else:
            assert isinstance(entry, tuple)
            for j, iv in enumerate(entry):
                for nb in interval_neighbors(iv):
                    moved = entry[:j] + (nb,) + entry[j + 1:]
                    out.append(params.replace(i, moved))
    return out


def sample_neighbors(params: ParamVector, n: int, rng: random.Random) -> list[ParamVector]:
    """n distinct neighbors, uniform without replacement; the whole
    neighborhood when n is at least its size."""
    if n < 1:
        raise ConfigError("neighbor sample size must be >= 1")
    full = param_neighbors(params)
    if n >= len(full):
        return full
    return rng.sample(full, n)


def identity_params(arch: ArchitectureSpec) -> ParamVector:
    """The identity-like starting point: {o} elements, [{o}, W] intervals."""
    entries: list[LayerParams] = []
    origin = PixelSet.of([ORIGIN])
    for layer in arch.layers:
        if layer.kind == "complement":
            entries.append(None)
        elif layer.kind in SE_KINDS:
            entries.append(origin)
        else:
            w = layer.window_obj
            iv = Interval(w, origin, w.support)
            entries.append(tuple(iv for _ in range(layer.k)))
    return ParamVector(arch, tuple(entries))


def init_params(arch: ArchitectureSpec, rng: random.Random, perturbation: int = 2) -> ParamVector:
    """Identity start, then `perturbation` random unit moves per coordinate."""
    if perturbation < 0:
        raise ConfigError("perturbation must be >= 0")
    start = identity_params(arch)
    entries: list[LayerParams] = []
    for layer, entry in zip(arch.layers, start.entries):
        if layer.kind == "complement":
            entries.append(None)
        elif layer.kind in SE_KINDS:
            assert isinstance(entry, PixelSet)
            se = entry
            for _ in range(perturbation):
                se = rng.choice(set_neighbors(se, layer.window_obj))
            entries.append(se)
        else:
            assert isinstance(entry, tuple)
            moved = []
            for iv in entry:
                for _ in range(perturbation):
                    iv = rng.choice(interval_neighbors(iv))
                moved.append(iv)
            entries.append(tuple(moved))
    return ParamVector(arch, tuple(entries))


def serialize_params(params: ParamVector) -> str:
    """Human-readable JSON: one entry per layer, sets as 0/1 grids."""
    layers = []
    for layer, entry in zip(params.arch.layers, params.entries):
        item = _layer_to_json(layer)
        bounds = _layer_bounds(layer)
        if layer.kind in SE_KINDS:
            assert isinstance(entry, PixelSet)
            item["se"] = render_grid(entry, bounds)
        elif layer.kind in GEN_KINDS:
            assert isinstance(entry, tuple)
            item["intervals"] = [
                {"a": render_grid(iv.left, bounds), "b": render_grid(iv.right, bounds)}
                for iv in entry
            ]
        layers.append(item)
    return json.dumps({"layers": layers}, indent=2) + "\n"


def _layer_bounds(layer: LayerSpec) -> tuple[int, int, int, int] | None:
    if layer.kind == "complement":
        return None
    box = (layer.window_obj.support | PixelSet.of([ORIGIN])).bounding_box()
    return box


def deserialize_params(text: str) -> ParamVector:
    """Parse serialize_params output; errors carry the offending layer."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DataFormatError(f"params file is not valid JSON: {e}") from e
    if not isinstance(data, dict) or not isinstance(data.get("layers"), list):
        raise DataFormatError("params file must be an object with a 'layers' array")
    specs: list[LayerSpec] = []
    entries: list[LayerParams] = []
    for i, item in enumerate(data["layers"]):
        layer = _layer_from_json(item, i)
        specs.append(layer)
        try:
            if layer.kind == "complement":
                entries.append(None)
            elif layer.kind in SE_KINDS:
                entries.append(parse_grid(item["se"]))
            else:
                ivs = []
                for raw in item["intervals"]:
                    left = parse_grid(raw["a"])
                    right = parse_grid(raw["b"])
                    try:
                        ivs.append(Interval(layer.window_obj, left, right))
                    except ValueError as e:
                        raise DataFormatError(f"layer {i}: invalid interval: {e}") from e
                entries.append(tuple(ivs))
        except (KeyError, TypeError) as e:
            raise DataFormatError(f"layer {i}: missing or malformed parameters: {e}") from e
        except GridParseError as e:
            raise DataFormatError(f"layer {i}: {e}") from e
    arch = ArchitectureSpec(tuple(specs))
    try:
        return ParamVector(arch, tuple(entries))
    except ConfigError as e:
        raise DataFormatError(str(e)) from e
