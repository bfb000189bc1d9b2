"""Horizontal layered drawing of st-digraphs on an integer grid.

Each digraph is drawn left to right: longest-path layering with the loop
back edges as the feedback arc set, a node in the middle of every labeled
edge for its token box, dummy nodes on long edges, barycenter crossing
reduction and orthogonal routing with interval-coloured connector columns.

Grid conventions: every layer is one column wide, every channel between two
layers is as wide as the number of connector columns it needs, every node
occupies one row.  Loop back edges run along extra rows under the drawing.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .nfa_core import NfaSystem, StDigraph, count_symbols

__all__ = [
    "CyclicGraph",
    "Hop",
    "LayeredDrawing",
    "Metrics",
    "layer_assign",
    "build_layers",
    "order_layers",
    "count_crossings",
    "color_intervals",
    "assign_rows",
    "route_edges",
    "layout_digraph",
    "compute_metrics",
]

SWEEPS = 4


class CyclicGraph(Exception):
    pass


@dataclass(frozen=True)
class Hop:
    """One segment of an edge between adjacent layers."""

    src: tuple
    dst: tuple
    edge: int


@dataclass
class LayeredDrawing:
    layers: list  # list of lists of node keys
    hops: list
    reversed_edges: list  # Edge objects
    box_nodes: dict  # edge id -> node key
    dummy_vertices: set = field(default_factory=set)
    coords: dict = field(default_factory=dict)  # node -> (column, row)
    routes: dict = field(default_factory=dict)  # edge id -> [(column, row), ...]
    hop_routes: dict = field(default_factory=dict)  # Hop -> [(column, row), ...]
    connector_columns: dict = field(default_factory=dict)  # channel -> {item: column}
    loop_rows: dict = field(default_factory=dict)  # reversed edge id -> row
    rows: dict = field(default_factory=dict)  # node -> row, order-preserving per layer
    channel_intervals: dict = field(default_factory=dict)  # channel -> {trunk: (lo, hi)}
    trunk_of: dict = field(default_factory=dict)  # bent Hop -> trunk key
    n_rows: int = 0
    n_cols: int = 0

    def layer_of(self):
        return {v: i for i, layer in enumerate(self.layers) for v in layer}

    @property
    def area(self):
        return self.n_rows * self.n_cols


@dataclass(frozen=True)
class Metrics:
    area: int
    tokens: int
    components: int


def vertex(v):
    return ("v", v)


def node_name(node):
    """Stable text form of a node key: v3, b5 (box of edge 5), d5.1 (dummy)."""
    if node[0] == "d":
        return f"d{node[1]}.{node[2]}"
    return f"{node[0]}{node[1]}"


def layer_assign(d: StDigraph) -> dict:
    """Longest-path layering of the vertices, reversed edges excluded.

    A labeled edge must span at least two layers so that its token gets a
    column of its own; epsilon edges span at least one.
    """
    succ = defaultdict(list)
    indeg = {v: 0 for v in d.vertices}
    for e in d.sorted_edges():
        if e.reversed:
            continue
        succ[e.src].append((e.dst, 1 if e.label is None else 2))
        indeg[e.dst] += 1
    layer = {v: 0 for v in d.vertices}
    ready = sorted(v for v, k in indeg.items() if k == 0)
    seen = 0
    while ready:
        v = ready.pop(0)
        seen += 1
        for w, span in succ[v]:
            layer[w] = max(layer[w], layer[v] + span)
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
        ready.sort()
    if seen != len(d.vertices):
        raise CyclicGraph("cycle among non-reversed edges")
    last = max(layer.values())
    # t alone in the final layer keeps the exit stub straight
    if any(layer[v] == last for v in d.vertices if v != d.t):
        last += 1
    layer[d.t] = last
    return layer


def build_layers(d: StDigraph, layer: dict) -> LayeredDrawing:
    """Subdivide every forward edge into single-layer hops.

    A labeled edge gets a box node in its middle layer, dummies elsewhere.
    Nodes are initially ordered by depth-first discovery from s.
    """
    hops = []
    boxes = {}
    dummies = set()
    node_layer = {vertex(v): layer[v] for v in d.vertices}
    for e in d.sorted_edges():
        if e.reversed:
            continue
        lo, hi = layer[e.src], layer[e.dst]
        mid = (lo + hi) // 2 if e.label is not None else None
        chain = [vertex(e.src)]
        for k in range(lo + 1, hi):
            if k == mid:
                node = ("b", e.id)
                boxes[e.id] = node
            else:
                node = ("d", e.id, k)
                dummies.add(node)
            node_layer[node] = k
            chain.append(node)
        chain.append(vertex(e.dst))
        hops.extend(Hop(a, b, e.id) for a, b in zip(chain, chain[1:]))

    out = defaultdict(list)
    for h in hops:
        out[h.src].append(h.dst)
    order = []
    seen = set()
    stack = [vertex(d.s)]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        order.append(v)
        stack.extend(reversed(out[v]))
    order.extend(sorted(set(node_layer) - seen))
    n = max(node_layer.values()) + 1
    layers = [[] for _ in range(n)]
    for v in order:
        layers[node_layer[v]].append(v)
    rev = [e for e in d.sorted_edges() if e.reversed]
    return LayeredDrawing(layers, hops, rev, boxes, dummies)


def count_crossings(layers, hops) -> int:
    pos = {v: i for layer in layers for i, v in enumerate(layer)}
    lay = {v: k for k, layer in enumerate(layers) for v in layer}
    by_layer = defaultdict(list)
    for h in hops:
        by_layer[lay[h.src]].append((pos[h.src], pos[h.dst]))
    total = 0
    for segs in by_layer.values():
        for i, (a1, b1) in enumerate(segs):
            for a2, b2 in segs[i + 1 :]:
                if (a1 - a2) * (b1 - b2) < 0:
                    total += 1
    return total


def order_layers(layers, hops):
    """Barycenter sweeps, down then up, keeping the best ordering seen."""
    preds, succs = defaultdict(list), defaultdict(list)
    for h in hops:
        preds[h.dst].append(h.src)
        succs[h.src].append(h.dst)
    current = [list(layer) for layer in layers]
    best, best_x = [list(layer) for layer in current], count_crossings(current, hops)

    def resort(layer, ref, nbrs):
        pos = {v: i for i, v in enumerate(ref)}
        here = {v: i for i, v in enumerate(layer)}

        def key(v):
            ps = [pos[u] for u in nbrs[v] if u in pos]
            bary = sum(ps) / len(ps) if ps else here[v]
            return (bary, v)

        return sorted(layer, key=key)

    for _ in range(SWEEPS):
        before = [list(layer) for layer in current]
        for i in range(1, len(current)):
            current[i] = resort(current[i], current[i - 1], preds)
        for i in range(len(current) - 2, -1, -1):
            current[i] = resort(current[i], current[i + 1], succs)
        x = count_crossings(current, hops)
        if x < best_x:
            best, best_x = [list(layer) for layer in current], x
        if current == before:
            break
    return best


def color_intervals(intervals):
    """Greedy left-edge colouring of closed intervals.

    ``intervals`` maps a key to (lo, hi).  Returns key -> colour; the number
    of colours equals the maximum number of pairwise overlapping intervals.
    """
    free_at = []  # colour -> last hi
    colors = {}
    for key, (lo, hi) in sorted(intervals.items(), key=lambda kv: (kv[1][0], kv[1][1], repr(kv[0]))):
        for c, end in enumerate(free_at):
            if end < lo:
                free_at[c] = hi
                colors[key] = c
                break
        else:
            colors[key] = len(free_at)
            free_at.append(hi)
    return colors


def assign_rows(layers, hops) -> dict:
    """Rows for every node, keeping each layer's order but allowing gaps.

    Minimizes the weighted total vertical travel of the hops plus a small
    charge on drawing height.  The constraints are difference constraints,
    so the LP optimum found by the simplex solver is integral.  Hops between
    dummies weigh most (long edges stay straight), hops touching a token box
    next, the rest least.
    """
    nodes = [v for layer in layers for v in layer]
    idx = {v: i for i, v in enumerate(nodes)}
    n, m = len(nodes), len(hops)
    if m == 0:
        return {v: i for layer in layers for i, v in enumerate(layer)}
    nvar = n + m + 1  # rows, |travel| per hop, height
    c = np.zeros(nvar)
    for k, h in enumerate(hops):
        kinds = {h.src[0], h.dst[0]}
        c[n + k] = 8.0 if kinds == {"d"} else 2.0 if kinds & {"d", "b"} else 1.0
    c[-1] = 0.5
    rows_a, rhs = [], []

    def le(coefs, bound):
        r = np.zeros(nvar)
        for j, a in coefs:
            r[j] += a
        rows_a.append(r)
        rhs.append(bound)

    for k, h in enumerate(hops):
        a, b = idx[h.src], idx[h.dst]
        le([(a, 1), (b, -1), (n + k, -1)], 0)
        le([(b, 1), (a, -1), (n + k, -1)], 0)
    for layer in layers:
        for u, v in zip(layer, layer[1:]):
            le([(idx[u], 1), (idx[v], -1)], -1)
        for v in layer:
            le([(idx[v], 1), (nvar - 1, -1)], 0)
    res = linprog(c, A_ub=np.array(rows_a), b_ub=np.array(rhs), bounds=[(0, None)] * nvar, method="highs")
    fallback = {v: i for layer in layers for i, v in enumerate(layer)}
    if res.status != 0:
        return fallback
    y = {v: int(round(res.x[idx[v]])) for v in nodes}
    if any(y[v] <= y[u] for layer in layers for u, v in zip(layer, layer[1:])):
        return fallback
    used = sorted(set(y.values()))
    squeeze = {r: i for i, r in enumerate(used)}
    return {v: squeeze[r] for v, r in y.items()}


def route_edges(ld: LayeredDrawing) -> LayeredDrawing:
    """Assign grid coordinates and orthogonal routes in place; returns ``ld``.

    Uses ``ld.rows`` when set, otherwise each node's index in its layer.
    """
    layer = ld.layer_of()
    row = ld.rows or {v: i for lay in ld.layers for i, v in enumerate(lay)}
    ld.rows = row
    n_layers = len(ld.layers)
    base_rows = max(row.values()) + 1

    # loop back edges: one dedicated row each where their spans overlap
    rev_span = {}
    for e in ld.reversed_edges:
        a, b = layer[vertex(e.dst)] - 1, layer[vertex(e.src)]
        rev_span[e.id] = (min(a, b), max(a, b))
    loop_color = color_intervals(rev_span)
    ld.loop_rows = {eid: base_rows + c for eid, c in loop_color.items()}

    # Bent hops leaving one node share a single vertical trunk, as do bent
    # hops entering one node (confluent fan-out / fan-in).
    bent = [h for h in ld.hops if row[h.src] != row[h.dst]]
    fan_out = defaultdict(list)
    fan_in = defaultdict(list)
    for h in bent:
        fan_out[h.src].append(h)
        fan_in[h.dst].append(h)
    ld.trunk_of = {}
    channels = defaultdict(dict)
    for h in bent:
        if len(fan_out[h.src]) > 1:
            key, members = ("out", node_name(h.src)), fan_out[h.src]
        elif len(fan_in[h.dst]) > 1:
            key, members = ("in", node_name(h.dst)), fan_in[h.dst]
        else:
            key, members = ("hop", node_name(h.src), node_name(h.dst)), [h]
        rows_used = [row[m.src] for m in members] + [row[m.dst] for m in members]
        channels[layer[h.src]][key] = (min(rows_used), max(rows_used))
        ld.trunk_of[h] = key
    for e in ld.reversed_edges:
        bottom = ld.loop_rows[e.id]
        channels[layer[vertex(e.src)]][("loop-out", e.id)] = (row[vertex(e.src)], bottom)
        channels[layer[vertex(e.dst)] - 1][("loop-in", e.id)] = (row[vertex(e.dst)], bottom)
    ld.channel_intervals = {ch: dict(iv) for ch, iv in sorted(channels.items())}
    colors = {ch: color_intervals(iv) for ch, iv in channels.items()}
    widths = [max(colors.get(i, {}).values(), default=-1) + 1 for i in range(n_layers)]

    x = []
    col = 0
    for i in range(n_layers):
        x.append(col)
        col += 1 + widths[i]
    ld.n_cols = x[-1] + 1
    ld.n_rows = base_rows + (max(loop_color.values()) + 1 if loop_color else 0)
    ld.coords = {v: (x[layer[v]], row[v]) for v in row}
    ld.connector_columns = {ch: {k: x[ch] + 1 + c for k, c in cs.items()} for ch, cs in sorted(colors.items())}

    for h in ld.hops:
        (xa, ra), (xb, rb) = ld.coords[h.src], ld.coords[h.dst]
        if ra == rb:
            ld.hop_routes[h] = [(xa, ra), (xb, rb)]
        else:
            cx = ld.connector_columns[layer[h.src]][ld.trunk_of[h]]
            ld.hop_routes[h] = [(xa, ra), (cx, ra), (cx, rb), (xb, rb)]

    by_edge = defaultdict(list)
    for h in ld.hops:
        by_edge[h.edge].append(ld.hop_routes[h])
    for eid, pieces in by_edge.items():
        ld.routes[eid] = _join(pieces)
    for e in ld.reversed_edges:
        (xu, ru), (xv, rv) = ld.coords[vertex(e.src)], ld.coords[vertex(e.dst)]
        c1 = ld.connector_columns[layer[vertex(e.src)]][("loop-out", e.id)]
        c2 = ld.connector_columns[layer[vertex(e.dst)] - 1][("loop-in", e.id)]
        bottom = ld.loop_rows[e.id]
        ld.routes[e.id] = [(xu, ru), (c1, ru), (c1, bottom), (c2, bottom), (c2, rv), (xv, rv)]
    return ld


def _join(pieces):
    """Concatenate hop polylines, dropping repeated and collinear points."""
    pts = []
    for piece in pieces:
        for p in piece:
            if pts and pts[-1] == p:
                continue
            pts.append(p)
    return simplify(pts)


def simplify(pts):
    out = []
    for p in pts:
        if len(out) >= 2:
            (x0, y0), (x1, y1) = out[-2], out[-1]
            if (x0 == x1 == p[0]) or (y0 == y1 == p[1]):
                out[-1] = p
                continue
        out.append(p)
    return out


def layout_digraph(d: StDigraph) -> LayeredDrawing:
    ld = build_layers(d, layer_assign(d))
    ld.layers = order_layers(ld.layers, ld.hops)
    ld.rows = assign_rows(ld.layers, ld.hops)
    return route_edges(ld)


def compute_metrics(drawings, sys: NfaSystem) -> Metrics:
    """Area summed over the drawings; tokens and components from the system."""
    return Metrics(
        area=sum(ld.area for ld in drawings),
        tokens=sum(count_symbols(d) for d in sys.graphs.values()),
        components=len(sys.graphs),
    )


def drawing_to_dict(ld: LayeredDrawing) -> dict:
    return {
        "area": ld.area,
        "columns": ld.n_cols,
        "coords": {node_name(v): list(c) for v, c in sorted(ld.coords.items(), key=lambda kv: node_name(kv[0]))},
        "layers": [[node_name(v) for v in layer] for layer in ld.layers],
        "routes": {str(eid): [list(p) for p in pts] for eid, pts in sorted(ld.routes.items())},
        "rows": ld.n_rows,
    }
