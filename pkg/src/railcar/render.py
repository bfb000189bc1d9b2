"""Confluent railroad diagrams from layered drawings, and their SVG form.

Every labeled edge becomes a token box at its box node, every vertex a
junction, every stretch of route between junctions and boxes a piece of
track.  Corners are rounded with quarter arcs so that a train can only
follow a track where it stays smooth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from xml.sax.saxutils import escape, quoteattr

from .grammar_io import CharClass, Nonterminal, Terminal
from .layout import LayeredDrawing, simplify, vertex

__all__ = [
    "Style",
    "load_style",
    "TokenBox",
    "Junction",
    "Track",
    "Diagram",
    "to_diagram",
    "emit_svg",
    "component_order",
    "smooth_language",
]

EAST, WEST, NORTH, SOUTH = (1, 0), (-1, 0), (0, -1), (0, 1)


@dataclass(frozen=True)
class Style:
    font_size: float = 14
    font_family: str = "monospace"
    char_width: float = 8.4
    row_height: float = 40
    box_height: float = 26
    box_padding: float = 10
    column_width: float = 24
    arc_ratio: float = 0.4
    margin: float = 20
    title_height: float = 28
    component_gap: float = 24
    stroke_width: float = 2
    stub_length: float = 16

    @property
    def arc_radius(self):
        return self.arc_ratio * self.row_height


def load_style(path=None) -> Style:
    """Style from a JSON object of overrides; ``None`` gives the defaults."""
    if path is None:
        return Style()
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    known = {f.name for f in fields(Style)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown style keys: {', '.join(unknown)}")
    return Style(**data)


@dataclass(frozen=True)
class TokenBox:
    label: str
    kind: str  # "terminal" or "nonterminal"
    x: float  # centre
    y: float
    width: float
    height: float
    edge: int
    target: str | None = None  # referenced nonterminal

    @property
    def entry(self):
        return (self.x - self.width / 2, self.y)

    @property
    def exit(self):
        return (self.x + self.width / 2, self.y)


@dataclass(frozen=True)
class Junction:
    vertex: int
    x: float
    y: float
    incident: tuple  # ("in"|"out", heading) per attached track end
    orientation: tuple = EAST


@dataclass
class Track:
    """A polyline with rounded corners.

    ``segments`` holds ("L", x0, y0, x1, y1) and ("A", x0, y0, x1, y1, r,
    sweep) primitives; lines are axis parallel, arcs quarter circles.
    """

    points: list
    segments: list = field(default_factory=list)
    start_heading: tuple = EAST
    end_heading: tuple = EAST
    kind: str = "forward"  # forward, loop, stub

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]


@dataclass
class Diagram:
    name: str
    width: float
    height: float
    boxes: list
    junctions: list
    tracks: list
    entry: tuple
    exit: tuple
    tokens: list = field(default_factory=list)  # (box, label symbol)


def _label_text(sym):
    if isinstance(sym, CharClass):
        return f"{sym.lo}…{sym.hi}"
    if isinstance(sym, Terminal):
        return sym.text
    return sym.name


def _heading(p, q):
    dx, dy = q[0] - p[0], q[1] - p[1]
    return ((dx > 0) - (dx < 0), (dy > 0) - (dy < 0))


def _rounded(points, radius):
    """Line/arc primitives for an orthogonal polyline.

    Each corner gets a quarter arc whose radius is clamped to half of the
    shorter adjacent segment so neighbouring arcs never overlap.
    """
    pts = simplify(points)
    if len(pts) < 2:
        return []
    segs = []
    cur = pts[0]
    for i in range(1, len(pts) - 1):
        a, b, c = pts[i - 1], pts[i], pts[i + 1]
        lin = abs(b[0] - a[0]) + abs(b[1] - a[1])
        lout = abs(c[0] - b[0]) + abs(c[1] - b[1])
        r = min(radius, lin / 2, lout / 2)
        h1, h2 = _heading(a, b), _heading(b, c)
        p1 = (b[0] - h1[0] * r, b[1] - h1[1] * r)
        p2 = (b[0] + h2[0] * r, b[1] + h2[1] * r)
        if p1 != cur:
            segs.append(("L", cur[0], cur[1], p1[0], p1[1]))
        cross = h1[0] * h2[1] - h1[1] * h2[0]
        segs.append(("A", p1[0], p1[1], p2[0], p2[1], r, 1 if cross > 0 else 0))
        cur = p2
    if cur != pts[-1]:
        segs.append(("L", cur[0], cur[1], pts[-1][0], pts[-1][1]))
    return segs


def _track(points, radius, kind="forward"):
    pts = simplify([tuple(p) for p in points])
    return Track(pts, _rounded(pts, radius), _heading(pts[0], pts[1]), _heading(pts[-2], pts[-1]), kind)


def to_diagram(ld: LayeredDrawing, d, name: str, style: Style = Style()) -> Diagram:
    """Reinterpret a routed layered drawing as a confluent diagram."""
    label_of = {e.id: e.label for e in d.sorted_edges()}

    box_w = {}
    for eid, node in ld.box_nodes.items():
        text = _label_text(label_of[eid])
        box_w[node] = len(text) * style.char_width + 2 * style.box_padding

    # grid column -> pixel centre; a column widens to fit its widest box
    col_w = [style.column_width] * ld.n_cols
    for node, w in box_w.items():
        c = ld.coords[node][0]
        col_w[c] = max(col_w[c], w + style.column_width)
    xs, acc = [], style.margin + style.stub_length
    for w in col_w:
        xs.append(acc + w / 2)
        acc += w
    width = acc + style.stub_length + style.margin
    top = style.title_height

    def px(pt):
        return (round(xs[pt[0]], 2), round(top + style.row_height * (pt[1] + 0.5), 2))

    boxes = []
    box_at = {}
    for eid, node in sorted(ld.box_nodes.items()):
        lab = label_of[eid]
        cx, cy = px(ld.coords[node])
        kind = "nonterminal" if isinstance(lab, Nonterminal) else "terminal"
        box = TokenBox(_label_text(lab), kind, cx, cy, box_w[node], style.box_height, eid,
                       lab.name if isinstance(lab, Nonterminal) else None)
        boxes.append(box)
        box_at[node] = box

    def station(node, leaving):
        """Where a track attaches to a node: junction centre or box side."""
        if node in box_at:
            b = box_at[node]
            return b.exit if leaving else b.entry
        return px(ld.coords[node])

    tracks = []
    radius = style.arc_radius
    by_edge = {}
    for h in ld.hops:
        by_edge.setdefault(h.edge, []).append(h)
    for eid in sorted(by_edge):
        pieces, cur = [], []
        for h in by_edge[eid]:
            pts = [px(p) for p in ld.hop_routes[h]]
            pts[0] = station(h.src, True)
            pts[-1] = station(h.dst, False)
            cur.extend(pts if not cur else pts[1:] if cur[-1] == pts[0] else pts)
            if h.dst in box_at or h.dst[0] == "v":
                pieces.append(cur)
                cur = []
        for piece in pieces:
            tracks.append(_track(piece, radius))
    for e in ld.reversed_edges:
        pts = [px(p) for p in ld.routes[e.id]]
        tracks.append(_track(pts, radius, "loop"))

    sx, sy = px(ld.coords[vertex(d.s)])
    tx, ty = px(ld.coords[vertex(d.t)])
    entry = (style.margin, sy)
    exit_ = (width - style.margin, ty)
    tracks.insert(0, _track([entry, (sx, sy)], radius, "stub"))
    tracks.append(_track([(tx, ty), exit_], radius, "stub"))

    junctions = []
    for v in sorted(d.vertices):
        p = px(ld.coords[vertex(v)])
        inc = tuple(sorted(
            [("in", t.end_heading) for t in tracks if t.end == p]
            + [("out", t.start_heading) for t in tracks if t.start == p]
        ))
        junctions.append(Junction(v, p[0], p[1], inc))
    height = top + style.row_height * ld.n_rows + style.margin / 2
    return Diagram(name, round(width, 2), round(height, 2), boxes, junctions, tracks, entry, exit_)


def component_order(sys) -> list:
    """Start symbol first, then breadth first along references."""
    order, seen = [sys.start], {sys.start}
    i = 0
    while i < len(order):
        for lab in sys.graphs[order[i]].labels():
            if isinstance(lab, Nonterminal) and lab.name not in seen and lab.name in sys.graphs:
                seen.add(lab.name)
                order.append(lab.name)
        i += 1
    order.extend(k for k in sys.graphs if k not in seen)
    return order


# -- SVG ---------------------------------------------------------------------


def _n(x):
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _path_data(track):
    out = [f"M{_n(track.start[0])} {_n(track.start[1])}"]
    for seg in track.segments:
        if seg[0] == "L":
            out.append(f"L{_n(seg[3])} {_n(seg[4])}")
        else:
            _, _, _, x1, y1, r, sweep = seg
            out.append(f"A{_n(r)} {_n(r)} 0 0 {sweep} {_n(x1)} {_n(y1)}")
    return " ".join(out)


CSS = """\
.track {{ fill: none; stroke: #222; stroke-width: {sw}; }}
.box {{ fill: #fff; stroke: #222; stroke-width: {sw}; }}
.box.nonterminal {{ fill: #eef3fb; }}
text {{ font-family: {ff}; font-size: {fs}px; fill: #111; }}
.title {{ font-weight: bold; }}
"""


def emit_svg(diagrams, style: Style = Style()) -> str:
    """One SVG document with a titled group per diagram, stacked vertically."""
    width = max((dg.width for dg in diagrams), default=style.margin * 2)
    lines = []
    y = style.margin / 2
    for dg in diagrams:
        lines.append(f'<g class="component" id={quoteattr("rr-" + dg.name)} transform="translate(0 {_n(y)})">')
        lines.append(f"<title>{escape(dg.name)}</title>")
        lines.append(f'<text class="title" x="{_n(style.margin)}" y="{_n(style.title_height * 0.6)}">{escape(dg.name)}</text>')
        for t in dg.tracks:
            lines.append(f'<path class="track {t.kind}" d="{_path_data(t)}"/>')
        for b in dg.boxes:
            rx = b.height / 2 if b.kind == "terminal" else 0
            lines.append(
                f'<rect class="box {b.kind}" x="{_n(b.x - b.width / 2)}" y="{_n(b.y - b.height / 2)}" '
                f'width="{_n(b.width)}" height="{_n(b.height)}" rx="{_n(rx)}"/>'
            )
            lines.append(
                f'<text x="{_n(b.x)}" y="{_n(b.y)}" text-anchor="middle" dominant-baseline="central">{escape(b.label)}</text>'
            )
        lines.append("</g>")
        y += dg.height + style.component_gap
    height = y - style.component_gap + style.margin / 2 if diagrams else style.margin
    css = CSS.format(sw=_n(style.stroke_width), ff=style.font_family, fs=_n(style.font_size))
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_n(width)}" height="{_n(height)}" '
        f'viewBox="0 0 {_n(width)} {_n(height)}">\n'
        f"<style>\n{css}</style>\n"
    )
    return head + "\n".join(lines) + "\n</svg>\n"


# -- smooth-path reading -----------------------------------------------------


def _smooth_graph(dg: Diagram):
    """Successor lists over track indices.

    A train on track i may continue on track j when i ends where j starts
    with the same heading, or when i enters a box whose exit starts j.
    """
    by_start = {}
    for j, t in enumerate(dg.tracks):
        by_start.setdefault(t.start, []).append(j)
    box_by_entry = {b.entry: b for b in dg.boxes}
    nxt = {}
    for i, t in enumerate(dg.tracks):
        box = box_by_entry.get(t.end)
        if box is not None and t.end_heading == EAST:
            nxt[i] = [(j, box) for j in by_start.get(box.exit, []) if dg.tracks[j].start_heading == EAST]
        else:
            nxt[i] = [(j, None) for j in by_start.get(t.end, []) if dg.tracks[j].start_heading == t.end_heading]
    return nxt


def smooth_language(diagrams, labels, alphabet, max_len, depth=3):
    """Strings readable along smooth tracks, entry stub to exit stub.

    ``labels`` maps (diagram name, edge id) to the edge's symbol; terminal
    boxes contribute their text, nonterminal boxes the (depth-bounded)
    reading of the referenced diagram.  Only strings of length <= max_len
    over ``alphabet`` are kept.
    """
    by_name = {dg.name: dg for dg in diagrams}
    graphs = {dg.name: _smooth_graph(dg) for dg in diagrams}
    memo = {}

    def words(sym, level):
        if isinstance(sym, Nonterminal):
            return read(sym.name, level + 1)
        if isinstance(sym, CharClass):
            return {c for c in alphabet if c in sym}
        return {sym.text} if all(c in alphabet for c in sym.text) and len(sym.text) <= max_len else set()

    def read(name, level):
        if level > depth:
            return set()
        if (name, level) in memo:
            return memo[(name, level)]
        memo[(name, level)] = set()
        dg, nxt = by_name[name], graphs[name]
        first = next(i for i, t in enumerate(dg.tracks) if t.start == dg.entry)
        goal = next(i for i, t in enumerate(dg.tracks) if t.end == dg.exit)
        seen = {(first, "")}
        stack = [(first, "")]
        out = set()
        while stack:
            i, w = stack.pop()
            if i == goal:
                out.add(w)
            for j, box in nxt[i]:
                exts = [""] if box is None else words(labels[(name, box.edge)], level)
                for x in exts:
                    w2 = w + x
                    if len(w2) <= max_len and (j, w2) not in seen:
                        seen.add((j, w2))
                        stack.append((j, w2))
        memo[(name, level)] = out
        return out

    return read(diagrams[0].name, 1)
