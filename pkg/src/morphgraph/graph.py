"""Operator graphs: validation, evaluation, window and basis propagation.

A graph is a DAG whose vertices either apply a window-local image operator
or fold their inputs with union/intersection. One input vertex feeds it,
one output vertex stores the result, and the whole graph realizes a single
translation-invariant, window-local operator. The same graph walked with
interval collections instead of images yields that operator's basis.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Union

from .errors import InvalidGraphError, WindowCapExceeded
from .grid import ORIGIN, PixelSet, Point
from .image import (
    BinaryImage,
    asf_layer,
    closing,
    complement,
    dilate,
    erode,
    inf_generating,
    opening,
    sup_generating,
)
from .lattice import (
    BooleanFn,
    Interval,
    IntervalCollection,
    Window,
    collection_complement,
    collection_inf,
    collection_sup,
    rewindow,
    translate_collection,
)

# Default cap on propagated window size for basis computation; interval
# extraction is O(4^|W|) bits, so this is a budget, not a correctness limit.
BASIS_BUDGET = 12


@dataclass(frozen=True)
class Input:
    pass


@dataclass(frozen=True)
class Output:
    pass


@dataclass(frozen=True)
class Sup:
    pass


@dataclass(frozen=True)
class Inf:
    pass


@dataclass(frozen=True)
class Complement:
    pass


@dataclass(frozen=True)
class ConstEmpty:
    """Constant empty-image operator; used to pad sup-generating graphs."""


@dataclass(frozen=True)
class Erosion:
    se: PixelSet


@dataclass(frozen=True)
class Dilation:
    se: PixelSet


@dataclass(frozen=True)
class Opening:
    se: PixelSet


@dataclass(frozen=True)
class Closing:
    se: PixelSet


@dataclass(frozen=True)
class Asf:
    se: PixelSet


@dataclass(frozen=True)
class SupGen:
    interval: Interval


@dataclass(frozen=True)
class InfGen:
    interval: Interval


VertexKind = Union[
    Input, Output, Sup, Inf, Complement, ConstEmpty,
    Erosion, Dilation, Opening, Closing, Asf, SupGen, InfGen,
]

_COMBINERS = (Sup, Inf)
_STRUCTURAL = (Input, Output, Sup, Inf)


def own_window(kind: VertexKind) -> Window:
    """Window within which this vertex's own operator is locally defined.

    Erosion reads at +se, dilation at -se; opening/closing/ASF compose the
    two. Sup-generating reads its interval's window, inf-generating the
    transpose. Combiners and identity-like vertices contribute {o}.
    """
    if isinstance(kind, (Input, Output, Sup, Inf, Complement)):
        return Window.origin()
    if isinstance(kind, ConstEmpty):
        return Window(PixelSet.empty())
    if isinstance(kind, Erosion):
        return Window(kind.se)
    if isinstance(kind, Dilation):
        return Window(kind.se.transpose())
    if isinstance(kind, (Opening, Closing)):
        return Window(kind.se.minkowski(kind.se.transpose()))
    if isinstance(kind, Asf):
        both = kind.se.minkowski(kind.se.transpose())
        return Window(both.minkowski(both))
    if isinstance(kind, SupGen):
        return kind.interval.window
    if isinstance(kind, InfGen):
        return kind.interval.window.transpose()
    raise TypeError(f"unknown vertex kind {kind!r}")


def apply_vertex(kind: VertexKind, x: BinaryImage) -> BinaryImage:
    if isinstance(kind, Erosion):
        return erode(x, kind.se)
    if isinstance(kind, Dilation):
        return dilate(x, kind.se)
    if isinstance(kind, Opening):
        return opening(x, kind.se)
    if isinstance(kind, Closing):
        return closing(x, kind.se)
    if isinstance(kind, Asf):
        return asf_layer(x, kind.se)
    if isinstance(kind, SupGen):
        return sup_generating(x, kind.interval)
    if isinstance(kind, InfGen):
        return inf_generating(x, kind.interval)
    if isinstance(kind, Complement):
        return complement(x)
    if isinstance(kind, ConstEmpty):
        return BinaryImage.empty(x.width, x.height)
    raise TypeError(f"vertex kind {kind!r} is not an operator")


@dataclass(frozen=True)
class Violation:
    axiom: str
    vertices: tuple[int, ...]
    message: str

    def __str__(self) -> str:
        where = ",".join(str(v) for v in self.vertices)
        return f"{self.axiom} at [{where}]: {self.message}"


@dataclass(frozen=True)
class MCGraph:
    """Directed computational graph over image operators."""

    vertices: tuple[VertexKind, ...]
    edges: frozenset[tuple[int, int]]

    @classmethod
    def of(cls, vertices, edges) -> "MCGraph":
        return cls(tuple(vertices), frozenset((int(a), int(b)) for a, b in edges))

    @cached_property
    def _ins(self) -> tuple[tuple[int, ...], ...]:
        ins: list[list[int]] = [[] for _ in self.vertices]
        for a, b in self.edges:
            if 0 <= b < len(self.vertices):
                ins[b].append(a)
        return tuple(tuple(sorted(s)) for s in ins)

    @cached_property
    def _outs(self) -> tuple[tuple[int, ...], ...]:
        outs: list[list[int]] = [[] for _ in self.vertices]
        for a, b in self.edges:
            if 0 <= a < len(self.vertices):
                outs[a].append(b)
        return tuple(tuple(sorted(s)) for s in outs)

    @cached_property
    def violations(self) -> tuple[Violation, ...]:
        return tuple(_validate(self))

    def validate(self) -> list[Violation]:
        return list(self.violations)

    def require_valid(self) -> None:
        if self.violations:
            raise InvalidGraphError(self.violations)

    @cached_property
    def topo_order(self) -> tuple[int, ...]:
        self.require_valid()
        return _topo_sort(self)

    @property
    def input_index(self) -> int:
        for i, k in enumerate(self.vertices):
            if isinstance(k, Input):
                return i
        raise ValueError("graph has no input vertex")

    @property
    def output_index(self) -> int:
        for i, k in enumerate(self.vertices):
            if isinstance(k, Output):
                return i
        raise ValueError("graph has no output vertex")


def _validate(g: MCGraph) -> list[Violation]:
    out: list[Violation] = []
    n = len(g.vertices)
    for a, b in sorted(g.edges):
        if not (0 <= a < n and 0 <= b < n):
            out.append(Violation("structure", (a, b), "edge endpoint out of range"))
        elif a == b:
            out.append(Violation("A1", (a,), "self-loop"))
    if out:
        return out

    if n <= 2:
        out.append(Violation("A1", (), f"graph has {n} vertices; more than 2 required"))

    order = _try_topo(g)
    if order is None:
        out.append(Violation("A1", (), "graph contains a cycle"))

    sources = [i for i in range(n) if not g._ins[i]]
    sinks = [i for i in range(n) if not g._outs[i]]
    inputs = [i for i, k in enumerate(g.vertices) if isinstance(k, Input)]
    outputs = [i for i, k in enumerate(g.vertices) if isinstance(k, Output)]

    if len(sources) != 1:
        out.append(Violation("A2", tuple(sources), f"{len(sources)} source vertices; exactly one required"))
    if len(inputs) != 1:
        out.append(Violation("A2", tuple(inputs), f"{len(inputs)} input vertices; exactly one required"))
    if len(sources) == 1 and inputs != sources:
        out.append(Violation("A2", tuple(sources), "the unique source is not the input vertex"))

    if len(sinks) != 1:
        out.append(Violation("A3", tuple(sinks), f"{len(sinks)} sink vertices; exactly one required"))
    if len(outputs) != 1:
        out.append(Violation("A3", tuple(outputs), f"{len(outputs)} output vertices; exactly one required"))
    if len(sinks) == 1 and outputs != sinks:
        out.append(Violation("A3", tuple(sinks), "the unique sink is not the output vertex"))

    for i, kind in enumerate(g.vertices):
        deg = len(g._ins[i])
        if isinstance(kind, _COMBINERS):
            if deg < 2:
                out.append(Violation("A5", (i,), f"combiner vertex has in-degree {deg}; at least 2 required"))
        elif isinstance(kind, Input):
            if deg != 0:
                out.append(Violation("A2", (i,), f"input vertex has in-degree {deg}"))
        else:
            # Operator vertices, including the output's stored identity.
            if deg != 1:
                out.append(Violation("A4", (i,), f"operator vertex has in-degree {deg}; exactly 1 required"))
    return out


def _try_topo(g: MCGraph) -> tuple[int, ...] | None:
    n = len(g.vertices)
    indeg = [len(g._ins[i]) for i in range(n)]
    ready = [i for i in range(n) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for u in g._outs[v]:
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(ready, u)
    if len(order) != n:
        return None
    return tuple(order)


def _topo_sort(g: MCGraph) -> tuple[int, ...]:
    order = _try_topo(g)
    assert order is not None
    return order


def validate(g: MCGraph) -> list[Violation]:
    """Check the graph axioms; empty list means the graph is well formed."""
    return g.validate()


def evaluate(g: MCGraph, x: BinaryImage) -> BinaryImage:
    """Run the graph on an image; refuses graphs that fail validation.

    Combiner vertices fold their inputs in ascending vertex order, so the
    result is identical regardless of scheduling.
    """
    g.require_valid()
    vals: dict[int, BinaryImage] = {}
    for v in g.topo_order:
        kind = g.vertices[v]
        ins = g._ins[v]
        if isinstance(kind, Input):
            vals[v] = x
        elif isinstance(kind, Output):
            vals[v] = vals[ins[0]]
        elif isinstance(kind, Sup):
            vals[v] = reduce(lambda a, b: a | b, (vals[i] for i in ins))
        elif isinstance(kind, Inf):
            vals[v] = reduce(lambda a, b: a & b, (vals[i] for i in ins))
        else:
            vals[v] = apply_vertex(kind, vals[ins[0]])
    return vals[g.output_index]


def window_of(g: MCGraph) -> Window:
    """A window within which the graph's operator is locally defined.

    Propagated upper bound: operator vertices add their window by Minkowski
    sum, combiners take the union. Not necessarily minimal.
    """
    g.require_valid()
    win: dict[int, Window] = {}
    for v in g.topo_order:
        kind = g.vertices[v]
        ins = g._ins[v]
        if isinstance(kind, Input):
            win[v] = Window.origin()
        elif isinstance(kind, _COMBINERS):
            win[v] = reduce(lambda a, b: a.union(b), (win[i] for i in ins))
        else:
            win[v] = win[ins[0]].minkowski(own_window(kind))
    return win[g.output_index]


def evaluation_support(g: MCGraph) -> Window:
    """Offsets, relative to an output pixel, that influence its value.

    Includes positions read at intermediate vertices, not just input reads;
    frames that contain this support around a pixel reproduce the
    infinite-plane value at that pixel.
    """
    g.require_valid()
    suffix: dict[int, Window] = {}
    for v in reversed(g.topo_order):
        kind = g.vertices[v]
        if isinstance(kind, Output):
            suffix[v] = Window.origin()
            continue
        acc: Window | None = None
        for u in g._outs[v]:
            ku = g.vertices[u]
            w = suffix[u]
            if not isinstance(ku, _STRUCTURAL):
                w = w.minkowski(own_window(ku))
            acc = w if acc is None else acc.union(w)
        assert acc is not None
        suffix[v] = acc
    total = reduce(lambda a, b: a.union(b), suffix.values())
    return total.union(Window.origin())


def kernel_by_enumeration(g: MCGraph, cap: int | None = None) -> BooleanFn:
    """Truth table of the graph's operator, by evaluating every window load.

    Each subset of the propagated window is placed on a frame large enough
    for every intermediate read, the graph is run, and the bit records
    whether the origin belongs to the output. This is the independent
    oracle for the basis engine.
    """
    from .lattice import TABLE_CAP

    g.require_valid()
    w = window_of(g)
    n = len(w)
    limit = TABLE_CAP if cap is None else cap
    if n > limit:
        raise WindowCapExceeded(n, limit, "kernel enumeration window")

    support = evaluation_support(g).union(w)
    box = support.support.bounding_box()
    assert box is not None
    min_x, min_y, max_x, max_y = box
    off = Point(-min_x, -min_y)
    fw, fh = max_x - min_x + 1, max_y - min_y + 1
    o_idx = (ORIGIN + off).y * fw + (ORIGIN + off).x

    table = 0
    for mask in range(1 << n):
        bits = 0
        m = mask
        while m:
            low = m & -m
            m ^= low
            p = w.points[low.bit_length() - 1] + off
            bits |= 1 << (p.y * fw + p.x)
        img = BinaryImage(fw, fh, bits)
        res = evaluate(g, img)
        if (res.bits >> o_idx) & 1:
            table |= 1 << mask
    return BooleanFn(w, table)


@dataclass(frozen=True)
class _Basis:
    window: Window
    coll: IntervalCollection


def _check_budget(w: Window, budget: int) -> None:
    if len(w) > budget:
        raise WindowCapExceeded(len(w), budget, "basis propagation window")


def _erosion_post(b: IntervalCollection, se: PixelSet, budget: int) -> IntervalCollection:
    """Basis of (erosion by se) after the operator with basis b."""
    w_new = Window(b.window.support.minkowski(se))
    _check_budget(w_new, budget)
    if not se:
        return IntervalCollection.top(w_new)
    parts = [
        rewindow(translate_collection(b, -p), w_new)
        for p in se.sorted_points
    ]
    return reduce(collection_inf, parts)


def _dilation_post(b: IntervalCollection, se: PixelSet, budget: int) -> IntervalCollection:
    """Basis of (dilation by se) after the operator with basis b."""
    w_new = Window(b.window.support.minkowski(se.transpose()))
    _check_budget(w_new, budget)
    if not se:
        return IntervalCollection.empty(w_new)
    parts = [
        rewindow(translate_collection(b, -p), w_new)
        for p in se.sorted_points
    ]
    return reduce(collection_sup, parts)


def _supgen_post(b: IntervalCollection, iv: Interval, budget: int) -> IntervalCollection:
    """Composition rule: meet of an erosion term and an anti-dilation term."""
    w_new = Window(b.window.support.minkowski(iv.window.support))
    _check_budget(w_new, budget)
    ero = rewindow(_erosion_post(b, iv.left, budget), w_new)
    anti = (iv.window.support - iv.right).transpose()
    dil = rewindow(_dilation_post(b, anti, budget), w_new)
    return collection_inf(ero, collection_complement(dil))


def _infgen_post(b: IntervalCollection, iv: Interval, budget: int) -> IntervalCollection:
    """Dual composition rule: join of a dilation term and an anti-erosion term."""
    w_new = Window(b.window.support.minkowski(iv.window.support.transpose()))
    _check_budget(w_new, budget)
    dil = rewindow(_dilation_post(b, iv.left, budget), w_new)
    anti = (iv.window.support - iv.right).transpose()
    ero = rewindow(_erosion_post(b, anti, budget), w_new)
    return collection_sup(dil, collection_complement(ero))


def basis_of(g: MCGraph, budget: int = BASIS_BUDGET) -> IntervalCollection:
    """Basis of the graph's operator, propagated through the graph.

    Walks the DAG combining (window, interval collection) pairs instead of
    images. Agrees with maximal_intervals(kernel_by_enumeration(g))
    whenever that oracle is computable.
    """
    g.require_valid()
    origin_iv = Interval(Window.origin(), PixelSet.of([ORIGIN]), PixelSet.of([ORIGIN]))
    state: dict[int, IntervalCollection] = {}
    for v in g.topo_order:
        kind = g.vertices[v]
        ins = g._ins[v]
        if isinstance(kind, Input):
            state[v] = IntervalCollection(Window.origin(), (origin_iv,))
        elif isinstance(kind, Output):
            state[v] = state[ins[0]]
        elif isinstance(kind, _COMBINERS):
            parts = [state[i] for i in ins]
            w_new = reduce(lambda a, b: a.union(b), (p.window for p in parts))
            _check_budget(w_new, budget)
            parts = [rewindow(p, w_new) for p in parts]
            op = collection_sup if isinstance(kind, Sup) else collection_inf
            state[v] = reduce(op, parts)
        elif isinstance(kind, Complement):
            state[v] = collection_complement(state[ins[0]])
        elif isinstance(kind, ConstEmpty):
            state[v] = IntervalCollection.empty(Window(PixelSet.empty()))
        elif isinstance(kind, Erosion):
            state[v] = _erosion_post(state[ins[0]], kind.se, budget)
        elif isinstance(kind, Dilation):
            state[v] = _dilation_post(state[ins[0]], kind.se, budget)
        elif isinstance(kind, Opening):
            state[v] = _dilation_post(_erosion_post(state[ins[0]], kind.se, budget), kind.se, budget)
        elif isinstance(kind, Closing):
            state[v] = _erosion_post(_dilation_post(state[ins[0]], kind.se, budget), kind.se, budget)
        elif isinstance(kind, Asf):
            b = _dilation_post(_erosion_post(state[ins[0]], kind.se, budget), kind.se, budget)
            state[v] = _erosion_post(_dilation_post(b, kind.se, budget), kind.se, budget)
        elif isinstance(kind, SupGen):
            state[v] = _supgen_post(state[ins[0]], kind.interval, budget)
        elif isinstance(kind, InfGen):
            state[v] = _infgen_post(state[ins[0]], kind.interval, budget)
        else:
            raise TypeError(f"unknown vertex kind {kind!r}")
    return state[g.output_index]


def build_supgen_from_basis(b: IntervalCollection) -> MCGraph:
    """Graph realizing exactly the operator whose basis is b.

    One sup-generating vertex per interval under a single supremum; a lone
    interval skips the supremum, and an empty collection degenerates to the
    constant-empty operator.
    """
    if len(b.intervals) == 0:
        vertices: list[VertexKind] = [Input(), ConstEmpty(), Output()]
        edges = [(0, 1), (1, 2)]
    elif len(b.intervals) == 1:
        vertices = [Input(), SupGen(b.intervals[0]), Output()]
        edges = [(0, 1), (1, 2)]
    else:
        vertices = [Input()]
        edges = []
        for iv in b.intervals:
            vertices.append(SupGen(iv))
            edges.append((0, len(vertices) - 1))
        sup_idx = len(vertices)
        vertices.append(Sup())
        for i in range(1, sup_idx):
            edges.append((i, sup_idx))
        vertices.append(Output())
        edges.append((sup_idx, sup_idx + 1))
    return MCGraph.of(vertices, edges)
