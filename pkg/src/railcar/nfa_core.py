"""The NFA representation: one labeled st-digraph per nonterminal.

Edge labels are grammar symbols, with ``None`` standing for epsilon.  A
``Nonterminal`` label means "recurse into that nonterminal's digraph".
Reversed edges are the loops created by tail-recursion loop back; they are
stored in their real (backward) direction and flagged so that layout can use
them as the feedback arc set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .grammar_io import CharClass, Grammar, Nonterminal, Production, Terminal

__all__ = [
    "Edge",
    "StDigraph",
    "NfaSystem",
    "grammar_to_nfa",
    "nfa_to_grammar",
    "count_symbols",
    "validate_system",
    "system_to_json",
]


@dataclass(frozen=True)
class Edge:
    id: int
    src: int
    dst: int
    label: object = None  # Terminal | CharClass | Nonterminal | None (epsilon)
    reversed: bool = False

    @property
    def is_epsilon(self):
        return self.label is None

    def key(self):
        return (self.src, self.dst, self.label, self.reversed)


@dataclass
class StDigraph:
    s: int
    t: int
    vertices: set = field(default_factory=set)
    edges: dict = field(default_factory=dict)  # id -> Edge

    # -- construction helpers ------------------------------------------------

    def copy(self) -> "StDigraph":
        return StDigraph(self.s, self.t, set(self.vertices), dict(self.edges))

    def fresh_vertex(self) -> int:
        v = max(self.vertices, default=-1) + 1
        self.vertices.add(v)
        return v

    def fresh_edge_id(self) -> int:
        return max(self.edges, default=-1) + 1

    def add_edge(self, src, dst, label=None, reversed=False) -> Edge | None:
        """Add an edge unless an identical (src, dst, label, reversed) one exists."""
        for e in self.edges.values():
            if e.key() == (src, dst, label, reversed):
                return None
        e = Edge(self.fresh_edge_id(), src, dst, label, reversed)
        self.edges[e.id] = e
        return e

    def remove_edge(self, eid):
        del self.edges[eid]

    # -- queries -------------------------------------------------------------

    def sorted_edges(self):
        return [self.edges[i] for i in sorted(self.edges)]

    def out_edges(self, v):
        return [e for e in self.sorted_edges() if e.src == v]

    def in_edges(self, v):
        return [e for e in self.sorted_edges() if e.dst == v]

    def s_prime(self):
        """Unique out-neighbor of s, or None when it is not unique."""
        nbrs = {e.dst for e in self.edges.values() if e.src == self.s}
        return next(iter(nbrs)) if len(nbrs) == 1 else None

    def t_prime(self):
        """Unique in-neighbor of t, or None when it is not unique."""
        nbrs = {e.src for e in self.edges.values() if e.dst == self.t}
        return next(iter(nbrs)) if len(nbrs) == 1 else None

    def labels(self):
        return [e.label for e in self.sorted_edges() if e.label is not None]

    def references(self, name):
        return [e for e in self.sorted_edges() if e.label == Nonterminal(name)]

    def forward_successors(self):
        succ = {v: [] for v in self.vertices}
        for e in self.sorted_edges():
            if not e.reversed:
                succ[e.src].append(e.dst)
        return succ

    def merge_vertices(self, keep, drop):
        """Identify ``drop`` with ``keep``; ε self-loops vanish, duplicates collapse."""
        old = self.sorted_edges()
        self.edges = {}
        self.vertices.discard(drop)
        for e in old:
            src = keep if e.src == drop else e.src
            dst = keep if e.dst == drop else e.dst
            if src == dst and e.label is None:
                continue
            if any(x.key() == (src, dst, e.label, e.reversed) for x in self.edges.values()):
                continue
            self.edges[e.id] = replace(e, src=src, dst=dst)

    def signature(self):
        return (self.s, self.t, tuple(sorted(self.vertices)), tuple(self.sorted_edges()))

    def __eq__(self, other):
        return isinstance(other, StDigraph) and self.signature() == other.signature()


@dataclass
class NfaSystem:
    graphs: dict  # nonterminal name -> StDigraph, in definition order
    start: str

    def copy(self) -> "NfaSystem":
        return NfaSystem({k: g.copy() for k, g in self.graphs.items()}, self.start)

    def total_symbols(self) -> int:
        return sum(count_symbols(g) for g in self.graphs.values())

    def occurrences(self, name):
        """All (graph name, edge) pairs labeled with nonterminal ``name``."""
        return [(k, e) for k, g in self.graphs.items() for e in g.references(name)]

    def reachable(self):
        seen, stack = {self.start}, [self.start]
        while stack:
            g = self.graphs.get(stack.pop())
            if g is None:
                continue
            for lab in g.labels():
                if isinstance(lab, Nonterminal) and lab.name not in seen:
                    seen.add(lab.name)
                    stack.append(lab.name)
        return seen

    def __eq__(self, other):
        return (
            isinstance(other, NfaSystem)
            and self.start == other.start
            and list(self.graphs) == list(other.graphs)
            and all(self.graphs[k] == other.graphs[k] for k in self.graphs)
        )


def count_symbols(d: StDigraph) -> int:
    """Number of labeled (non-epsilon) edges."""
    return sum(1 for e in d.edges.values() if e.label is not None)


def grammar_to_nfa(g: Grammar) -> NfaSystem:
    """Build one st-digraph per reachable nonterminal.

    Every production becomes a path between two shared vertices s' and t',
    and the sentinel epsilon edges s -> s' and t' -> t are added.  An empty
    production is an epsilon edge s' -> t', or the single vertex s' = t' when
    it is the only production.  Duplicate productions are dropped.
    """
    counter = 0

    def fresh():
        nonlocal counter
        counter += 1
        return counter - 1

    reachable = _reachable_nonterminals(g)
    graphs = {}
    for name in g.nonterminals:
        if name not in reachable:
            continue
        prods = list(dict.fromkeys(p.rhs for p in g.productions(name)))
        s = fresh()
        d = StDigraph(s, -1, {s})
        eid = 0
        edges = []
        s1 = fresh()
        d.vertices.add(s1)
        if any(prods):
            t1 = fresh()
            d.vertices.add(t1)
        else:
            t1 = s1
        for rhs in prods:
            u = s1
            for i, sym in enumerate(rhs):
                if i == len(rhs) - 1:
                    v = t1
                else:
                    v = fresh()
                    d.vertices.add(v)
                edges.append((u, v, sym))
                u = v
            if not rhs and s1 != t1:
                edges.append((s1, t1, None))
        t = fresh()
        d.vertices.add(t)
        d.t = t
        for src, dst, lab in [(s, s1, None)] + edges + [(t1, t, None)]:
            if any(e.key() == (src, dst, lab, False) for e in d.edges.values()):
                continue
            d.edges[eid] = Edge(eid, src, dst, lab)
            eid += 1
        graphs[name] = d
    return NfaSystem(graphs, g.start)


def _reachable_nonterminals(g: Grammar):
    seen, stack = {g.start}, [g.start]
    while stack:
        for p in g.productions(stack.pop()):
            for sym in p.rhs:
                if isinstance(sym, Nonterminal) and sym.name not in seen:
                    seen.add(sym.name)
                    stack.append(sym.name)
    return seen


def nfa_to_grammar(sys: NfaSystem) -> Grammar:
    """Encode the system as a CFG with one nonterminal per (graph, vertex).

    An edge (u, v) labeled x yields ``u -> x v``; the sink of each graph
    yields ``t -> epsilon``.  Reversed edges are ordinary edges here, their
    stored direction already encodes the loop.
    """

    def vname(gname, v):
        return f"{gname}-v{v}"

    rules = []
    order = [sys.start] + [k for k in sys.graphs if k != sys.start]
    for gname in order:
        d = sys.graphs[gname]
        for v in sorted(d.vertices):
            for e in d.out_edges(v):
                if e.label is None:
                    rhs = ()
                elif isinstance(e.label, Nonterminal):
                    rhs = (Nonterminal(vname(e.label.name, sys.graphs[e.label.name].s)),)
                else:
                    rhs = (e.label,)
                rules.append(Production(vname(gname, v), rhs + (Nonterminal(vname(gname, e.dst)),)))
            if v == d.t:
                rules.append(Production(vname(gname, v), ()))
    # vertices with no way forward still need a (useless) definition
    defined = {p.lhs for p in rules}
    for gname in order:
        for v in sorted(sys.graphs[gname].vertices):
            n = vname(gname, v)
            if n not in defined:
                rules.append(Production(n, (Nonterminal(n),)))
                defined.add(n)
    start = vname(sys.start, sys.graphs[sys.start].s)
    return Grammar.from_rules(rules, start)


def validate_system(sys: NfaSystem) -> list:
    """Return human-readable invariant violations (empty when valid)."""
    out = []
    if sys.start not in sys.graphs:
        out.append(f"start symbol {sys.start!r} has no digraph")
    for name, d in sys.graphs.items():
        out.extend(f"{name}: {msg}" for msg in _validate_graph(d))
        for e in d.sorted_edges():
            if isinstance(e.label, Nonterminal) and e.label.name not in sys.graphs:
                out.append(f"{name}: edge {e.id} has dangling label {e.label.name!r}")
    if sys.start in sys.graphs:
        reachable = sys.reachable()
        for name in sys.graphs:
            if name not in reachable:
                out.append(f"{name}: orphan digraph, not reachable from {sys.start!r}")
    return out


def _validate_graph(d: StDigraph):
    out = []
    for v in (d.s, d.t):
        if v not in d.vertices:
            out.append(f"terminal vertex {v} missing")
            return out
    for e in d.sorted_edges():
        if e.src not in d.vertices or e.dst not in d.vertices:
            out.append(f"edge {e.id} has an endpoint outside the vertex set")
        if e.reversed and e.label is not None:
            out.append(f"reversed edge {e.id} is labeled")
        if e.dst == d.s:
            out.append(f"s={d.s} has positive in-degree (edge {e.id})")
        if e.src == d.t:
            out.append(f"t={d.t} has positive out-degree (edge {e.id})")
    # reachability counts loop edges; acyclicity must hold without them
    succ, pred = {}, {}
    for e in d.sorted_edges():
        succ.setdefault(e.src, []).append(e.dst)
        pred.setdefault(e.dst, []).append(e.src)
    fwd = _closure(d.s, succ)
    bwd = _closure(d.t, pred)
    for v in sorted(d.vertices):
        if v not in fwd:
            out.append(f"vertex {v} is not reachable from s")
        if v not in bwd:
            out.append(f"vertex {v} cannot reach t")
    if _has_cycle(d.forward_successors()):
        out.append("cycle among non-reversed edges")
    return out


def _closure(root, adj):
    seen, stack = {root}, [root]
    while stack:
        for w in adj.get(stack.pop(), ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _has_cycle(succ):
    indeg = {v: 0 for v in succ}
    for ws in succ.values():
        for w in ws:
            if w in indeg:
                indeg[w] += 1
    ready = [v for v, k in indeg.items() if k == 0]
    done = 0
    while ready:
        v = ready.pop()
        done += 1
        for w in succ[v]:
            if w in indeg:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
    return done != len(succ)


# -- JSON dump ---------------------------------------------------------------


def label_to_json(label):
    if label is None:
        return {"kind": "epsilon"}
    if isinstance(label, Terminal):
        return {"kind": "terminal", "text": label.text}
    if isinstance(label, CharClass):
        return {"hi": label.hi, "kind": "range", "lo": label.lo}
    return {"kind": "nonterminal", "name": label.name}


def system_to_json(sys: NfaSystem) -> str:
    doc = {
        "graphs": {
            name: {
                "edges": [
                    {"from": e.src, "id": e.id, "label": label_to_json(e.label), "reversed": e.reversed, "to": e.dst}
                    for e in d.sorted_edges()
                ],
                "s": d.s,
                "t": d.t,
                "vertices": sorted(d.vertices),
            }
            for name, d in sys.graphs.items()
        },
        "order": list(sys.graphs),
        "start": sys.start,
    }
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False)
