"""JSON description files for operator graphs and textual basis dumps."""

from __future__ import annotations

import json
from pathlib import Path

from .errors import DataFormatError, GridParseError
from .grid import ORIGIN, PixelSet, parse_grid, render_grid
from .graph import (
    Asf, Closing, Complement, ConstEmpty, Dilation, Erosion, InfGen, Inf,
    Input, MCGraph, Opening, Output, Sup, SupGen, VertexKind,
)
from .lattice import Interval, IntervalCollection, Window

_SE_CTORS = {
    "erosion": Erosion, "dilation": Dilation, "opening": Opening,
    "closing": Closing, "asf": Asf,
}
_PLAIN = {
    "input": Input, "output": Output, "sup": Sup, "inf": Inf,
    "complement": Complement, "const_empty": ConstEmpty,
}


def _kind_to_json(kind: VertexKind) -> tuple[str, dict]:
    for name, ctor in _PLAIN.items():
        if isinstance(kind, ctor):
            return name, {}
    for name, ctor in _SE_CTORS.items():
        if isinstance(kind, ctor):
            return name, {"se": render_grid(kind.se)}
    if isinstance(kind, (SupGen, InfGen)):
        iv = kind.interval
        box = (iv.window.support | PixelSet.of([ORIGIN])).bounding_box()
        return ("supgen" if isinstance(kind, SupGen) else "infgen"), {
            "window": render_grid(iv.window.support, box),
            "a": render_grid(iv.left, box),
            "b": render_grid(iv.right, box),
        }
    raise TypeError(f"unknown vertex kind {kind!r}")


def graph_to_json(g: MCGraph) -> dict:
    vertices = []
    for i, kind in enumerate(g.vertices):
        name, params = _kind_to_json(kind)
        item: dict = {"id": i, "kind": name}
        if params:
            item["params"] = params
        vertices.append(item)
    return {"vertices": vertices, "edges": sorted([a, b] for a, b in g.edges)}


def _kind_from_json(name: str, params: dict, where: str) -> VertexKind:
    try:
        if name in _PLAIN:
            return _PLAIN[name]()
        if name in _SE_CTORS:
            return _SE_CTORS[name](parse_grid(params["se"]))
        if name in ("supgen", "infgen"):
            window = Window(parse_grid(params["window"]))
            iv = Interval(window, parse_grid(params["a"]), parse_grid(params["b"]))
            return SupGen(iv) if name == "supgen" else InfGen(iv)
    except (KeyError, TypeError) as e:
        raise DataFormatError(f"{where}: missing or malformed params: {e}") from e
    except (GridParseError, ValueError) as e:
        raise DataFormatError(f"{where}: {e}") from e
    raise DataFormatError(f"{where}: unknown vertex kind {name!r}")


def graph_from_json(data: dict) -> MCGraph:
    if not isinstance(data, dict) or "vertices" not in data or "edges" not in data:
        raise DataFormatError("graph JSON needs 'vertices' and 'edges' arrays")
    raw = data["vertices"]
    kinds: list[VertexKind | None] = [None] * len(raw)
    for item in raw:
        if not isinstance(item, dict) or "id" not in item or "kind" not in item:
            raise DataFormatError("each vertex needs 'id' and 'kind'")
        vid = item["id"]
        if not isinstance(vid, int) or not 0 <= vid < len(raw) or kinds[vid] is not None:
            raise DataFormatError(f"vertex id {vid!r} is out of range or duplicated")
        kinds[vid] = _kind_from_json(item["kind"], item.get("params", {}), f"vertex {vid}")
    edges = []
    for e in data["edges"]:
        if not (isinstance(e, (list, tuple)) and len(e) == 2):
            raise DataFormatError(f"bad edge {e!r}: expected [from, to]")
        edges.append((int(e[0]), int(e[1])))
    return MCGraph.of(kinds, edges)


def load_graph(path) -> MCGraph:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise DataFormatError(f"{path}: not valid JSON: {e}") from e
    return graph_from_json(data)


def save_graph(g: MCGraph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_json(g), indent=2) + "\n")


def format_basis(basis: IntervalCollection) -> str:
    """Window plus one A:/B: grid pair per interval, aligned on one box."""
    w = basis.window
    lines = [f"window ({len(w)} points):"]
    box = (w.support | PixelSet.of([ORIGIN])).bounding_box()
    lines.extend("  " + row for row in render_grid(w.support, box))
    lines.append(f"basis: {len(basis.intervals)} interval(s)")
    for i, iv in enumerate(basis.intervals):
        lines.append(f"interval {i}:")
        lines.append("  A:")
        lines.extend("    " + row for row in render_grid(iv.left, box))
        lines.append("  B:")
        lines.extend("    " + row for row in render_grid(iv.right, box))
    return "\n".join(lines) + "\n"
