"""Language-preserving rewrites of the NFA representation.

One global pass (nonterminal nesting) and the local passes loop back,
squish forward/backward, epsilon removal and confluent pinch.  Every pass
takes its input by value and returns a new object.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .grammar_io import Nonterminal
from .nfa_core import Edge, NfaSystem, StDigraph, count_symbols

__all__ = [
    "PASS_NAMES",
    "OptimizerConfig",
    "PassReport",
    "apply_nesting",
    "apply_loopback",
    "apply_squish",
    "apply_eps_removal",
    "apply_pinch",
    "optimize",
]

log = logging.getLogger(__name__)

PASS_NAMES = ("loopback", "nesting", "squish_fwd", "squish_bwd", "eps_removal", "pinch")


@dataclass(frozen=True)
class OptimizerConfig:
    nesting_threshold_k: int = 30
    max_rounds: int = 10
    passes: tuple = PASS_NAMES

    def __post_init__(self):
        if self.nesting_threshold_k < 1:
            raise ValueError("nesting_threshold_k must be >= 1")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        unknown = [p for p in self.passes if p not in PASS_NAMES]
        if unknown:
            raise ValueError(f"unknown passes: {', '.join(unknown)}")


@dataclass(frozen=True)
class PassReport:
    name: str
    applications: int
    symbols_before: int
    symbols_after: int
    graphs_before: int
    graphs_after: int
    round: int = 0

    def __str__(self):
        return (
            f"pass={self.name} applications={self.applications} "
            f"symbols={self.symbols_before}->{self.symbols_after} "
            f"graphs={self.graphs_before}->{self.graphs_after}"
        )


# -- global: nonterminal nesting ---------------------------------------------


def _nesting_candidate(sys: NfaSystem, k: int):
    """First (host name, edge, nested name) allowed by the nesting rules, or None.

    Smaller nested graphs are tried first, ties broken by name.
    """
    order = sorted((count_symbols(h), name) for name, h in sys.graphs.items() if name != sys.start)
    for size, name in order:
        h = sys.graphs[name]
        occ = sys.occurrences(name)
        if not occ:
            continue
        if len(occ) > 1:
            # Copying a tiny graph into several hosts keeps the symbol count;
            # it must not carry references of its own or it could recurse forever.
            if size > 1 or any(isinstance(lab, Nonterminal) for lab in h.labels()):
                continue
        for host, e in occ:
            if host == name:
                continue
            if count_symbols(sys.graphs[host]) - 1 + size < k:
                return host, e, name
    return None


def splice(g: StDigraph, e: Edge, h: StDigraph) -> StDigraph:
    """Replace edge ``e`` of ``g`` by a copy of ``h`` whose s, t sit on e's ends."""
    out = g.copy()
    out.remove_edge(e.id)
    vmap = {h.s: e.src, h.t: e.dst}
    for v in sorted(h.vertices):
        if v not in vmap:
            vmap[v] = out.fresh_vertex()
    for x in h.sorted_edges():
        out.add_edge(vmap[x.src], vmap[x.dst], x.label, x.reversed)
    return out


def apply_nesting(sys: NfaSystem, cfg: OptimizerConfig = OptimizerConfig()):
    before_sym, before_g = sys.total_symbols(), len(sys.graphs)
    sys = sys.copy()
    n = 0
    while True:
        cand = _nesting_candidate(sys, cfg.nesting_threshold_k)
        if cand is None:
            break
        host, e, name = cand
        sys.graphs[host] = splice(sys.graphs[host], e, sys.graphs[name])
        if not sys.occurrences(name):
            del sys.graphs[name]
        n += 1
    report = PassReport("nesting", n, before_sym, sys.total_symbols(), before_g, len(sys.graphs))
    return sys, report


# -- local passes ------------------------------------------------------------


def apply_loopback(d: StDigraph, owner: str):
    """Turn a final self-reference into a backward epsilon edge to s'."""
    refs = d.references(owner)
    if len(refs) != 1:
        return d, False
    e = refs[0]
    s1, t1 = d.s_prime(), d.t_prime()
    if s1 is None or t1 is None or e.dst != t1 or e.src == s1:
        return d, False
    if len(d.in_edges(t1)) < 2:
        # no way to leave the recursion: the nonterminal is empty, keep as is
        return d, False
    out = d.copy()
    out.remove_edge(e.id)
    out.edges[e.id] = Edge(e.id, e.src, s1, None, True)
    return out, True


def apply_squish(d: StDigraph, direction: str = "forward"):
    """Share one labeled edge among same-label siblings.

    Forward groups edges by (source, label), backward by (target, label).
    Each group of size m becomes one labeled edge plus m epsilon edges.
    """
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', not {direction!r}")
    fwd = direction == "forward"
    out = d.copy()
    n = 0
    while True:
        groups = {}
        for e in out.sorted_edges():
            if e.label is None or e.reversed:
                continue
            groups.setdefault((e.src if fwd else e.dst, e.label), []).append(e)
        group = next((g for g in groups.values() if len(g) > 1), None)
        if group is None:
            return out, n
        w = out.fresh_vertex()
        for e in group:
            out.remove_edge(e.id)
        anchor = group[0].src if fwd else group[0].dst
        if fwd:
            out.add_edge(anchor, w, group[0].label)
            for e in group:
                out.add_edge(w, e.dst)
        else:
            for e in group:
                out.add_edge(e.src, w)
            out.add_edge(w, anchor, group[0].label)
        n += 1


def _removable(d: StDigraph, e: Edge) -> bool:
    if e.label is not None or e.reversed or e.src == d.s or e.dst == d.t:
        return False
    return len(d.out_edges(e.src)) == 1 or len(d.in_edges(e.dst)) == 1


def apply_eps_removal(d: StDigraph):
    """Contract epsilon edges that are the sole exit of their source or
    the sole entry of their target."""
    out = d.copy()
    n = 0
    while True:
        e = next((e for e in out.sorted_edges() if _removable(out, e)), None)
        if e is None:
            return out, n
        out.remove_edge(e.id)
        keep, drop = min(e.src, e.dst), max(e.src, e.dst)
        out.merge_vertices(keep, drop)
        n += 1


def _biclique(d: StDigraph):
    """Greedy search for epsilon bicliques U x V with |U|, |V| >= 2."""
    nbrs = {}
    for e in d.sorted_edges():
        if e.label is None and not e.reversed:
            nbrs.setdefault(e.src, set()).add(e.dst)
    sources = sorted(nbrs)
    best = None
    for i, a in enumerate(sources):
        for b in sources[i + 1 :]:
            common = nbrs[a] & nbrs[b]
            if len(common) < 2:
                continue
            us = [u for u in sources if common <= nbrs[u]]
            gain = len(us) * len(common) - len(us) - len(common)
            key = (-gain, -len(us) * len(common), us, sorted(common))
            if best is None or key < best[0]:
                best = (key, us, sorted(common))
    return None if best is None else (best[1], best[2])


def apply_pinch(d: StDigraph):
    """Route every complete epsilon bipartite U x V through one new vertex."""
    out = d.copy()
    n = 0
    while True:
        found = _biclique(out)
        if found is None:
            return out, n
        us, vs = found
        doomed = [e.id for e in out.sorted_edges() if e.label is None and not e.reversed and e.src in us and e.dst in vs]
        for eid in doomed:
            out.remove_edge(eid)
        w = out.fresh_vertex()
        for u in us:
            out.add_edge(u, w)
        for v in vs:
            out.add_edge(w, v)
        n += 1


# -- driver ------------------------------------------------------------------


def _local(sys: NfaSystem, name: str):
    before_sym, before_g = sys.total_symbols(), len(sys.graphs)
    graphs = {}
    total = 0
    for owner, d in sys.graphs.items():
        if name == "loopback":
            d, applied = apply_loopback(d, owner)
            n = int(applied)
        elif name == "squish_fwd":
            d, n = apply_squish(d, "forward")
        elif name == "squish_bwd":
            d, n = apply_squish(d, "backward")
        elif name == "eps_removal":
            d, n = apply_eps_removal(d)
        else:
            d, n = apply_pinch(d)
        graphs[owner] = d
        total += n
    out = NfaSystem(graphs, sys.start)
    return out, PassReport(name, total, before_sym, out.total_symbols(), before_g, len(graphs))


def run_pass(sys: NfaSystem, name: str, cfg: OptimizerConfig = OptimizerConfig()):
    if name == "nesting":
        return apply_nesting(sys, cfg)
    return _local(sys, name)


def optimize(sys: NfaSystem, cfg: OptimizerConfig = OptimizerConfig()):
    """Run ``cfg.passes`` in rounds until a round changes nothing or
    ``cfg.max_rounds`` is reached.  Returns the system and all reports."""
    reports = []
    for rnd in range(1, cfg.max_rounds + 1):
        changed = False
        for name in cfg.passes:
            sys, rep = run_pass(sys, name, cfg)
            rep = PassReport(**{**rep.__dict__, "round": rnd})
            reports.append(rep)
            log.debug("round %d %s", rnd, rep)
            changed = changed or rep.applications > 0
        if not changed:
            break
    return sys, reports
