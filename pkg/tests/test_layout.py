import itertools
import random

import pytest
from conftest import SYNTHETIC, exponent_digraph, make_digraph, random_grammar

from railcar import grammar_to_nfa, parse_grammar
from railcar.heuristics import apply_pinch, optimize
from railcar.layout import (
    CyclicGraph,
    build_layers,
    color_intervals,
    compute_metrics,
    count_crossings,
    layer_assign,
    layout_digraph,
    order_layers,
    vertex,
)


def all_drawings(sys):
    return {name: (d, layout_digraph(d)) for name, d in sys.graphs.items()}


def test_chain_layers():
    d = make_digraph([(0, 1, None), (1, 2, None), (2, 3, None)])
    assert layer_assign(d) == {0: 0, 1: 1, 2: 2, 3: 3}


def test_short_alternative_is_subdivided():
    sys = grammar_to_nfa(parse_grammar('A ::= "b" | "b" C ;\nC ::= "c" ;'))
    d = sys.graphs["A"]
    ld = layout_digraph(d)
    s1, t1 = d.s_prime(), d.t_prime()
    (short,) = [e for e in d.edges.values() if e.src == s1 and e.dst == t1]
    hops = [h for h in ld.hops if h.edge == short.id]
    layer = ld.layer_of()
    assert len(hops) == layer[vertex(t1)] - layer[vertex(s1)] == 4
    assert ld.box_nodes[short.id] in {h.dst for h in hops}
    assert sum(1 for h in hops if h.dst[0] == "d") == 2


def test_cycle_detected():
    d = make_digraph([(0, 1, None), (1, 2, "a"), (2, 1, None), (2, 3, None)])
    with pytest.raises(CyclicGraph):
        layer_assign(d)


def check_drawing(d, ld):
    layer = ld.layer_of()
    assert layer[vertex(d.s)] == 0
    assert ld.layers[-1] == [vertex(d.t)]
    for h in ld.hops:
        assert layer[h.dst] == layer[h.src] + 1
    assert {e.id for e in ld.reversed_edges} == {e.id for e in d.edges.values() if e.reversed}
    # every token reads left to right: its route starts left of where it ends
    for e in d.edges.values():
        pts = ld.routes[e.id]
        if e.reversed:
            assert pts[0][0] > pts[-1][0]
        else:
            assert pts[0][0] < pts[-1][0]
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            assert x0 == x1 or y0 == y1
    cells = list(ld.coords.values())
    assert len(cells) == len(set(cells))
    for ch, intervals in ld.channel_intervals.items():
        cols = ld.connector_columns[ch]
        for a, b in itertools.combinations(intervals, 2):
            (lo1, hi1), (lo2, hi2) = intervals[a], intervals[b]
            if lo1 <= hi2 and lo2 <= hi1:
                assert cols[a] != cols[b]
    assert ld.area == ld.n_rows * ld.n_cols > 0


def test_lisp_drawings_valid(lisp):
    sys = grammar_to_nfa(lisp)
    for s in (sys, optimize(sys)[0]):
        for d, ld in all_drawings(s).values():
            check_drawing(d, ld)


def test_json_drawings_valid(json_grammar):
    sys = grammar_to_nfa(json_grammar)
    for s in (sys, optimize(sys)[0]):
        for d, ld in all_drawings(s).values():
            check_drawing(d, ld)


def test_random_drawings_valid():
    rng = random.Random(5)
    for _ in range(40):
        sys, _ = optimize(grammar_to_nfa(random_grammar(rng)))
        for d, ld in all_drawings(sys).values():
            check_drawing(d, ld)


def test_loopback_route_goes_back_to_s_prime():
    sys, _ = optimize(grammar_to_nfa(parse_grammar('L ::= | "a" L ;')))
    d = sys.graphs["L"]
    ld = layout_digraph(d)
    (rev,) = ld.reversed_edges
    pts = ld.routes[rev.id]
    assert pts[-1] == ld.coords[vertex(rev.dst)]
    assert pts[0] == ld.coords[vertex(rev.src)]
    # runs under the drawing
    assert max(y for _, y in pts) == ld.n_rows - 1 == ld.loop_rows[rev.id]


def test_parallel_paths_no_crossings():
    d = make_digraph([(0, 1, None), (1, 2, "a"), (2, 3, "b"), (1, 4, "c"), (4, 5, "d"), (3, 6, None), (5, 6, None), (6, 7, None)])
    ld = build_layers(d, layer_assign(d))
    assert count_crossings(order_layers(ld.layers, ld.hops), ld.hops) == 0


def test_single_node_layers_identity():
    d = make_digraph([(0, 1, None), (1, 2, "a"), (2, 3, None)])
    ld = build_layers(d, layer_assign(d))
    assert order_layers(ld.layers, ld.hops) == ld.layers


def test_pinch_removes_crossing():
    d = exponent_digraph()
    before = build_layers(d, layer_assign(d))
    assert count_crossings(order_layers(before.layers, before.hops), before.hops) == 1
    p, _ = apply_pinch(d)
    after = build_layers(p, layer_assign(p))
    assert count_crossings(order_layers(after.layers, after.hops), after.hops) == 0


@pytest.mark.parametrize("name, src, alphabet", SYNTHETIC, ids=[s[0] for s in SYNTHETIC])
def test_ordering_never_worse(name, src, alphabet):
    for d in grammar_to_nfa(parse_grammar(src)).graphs.values():
        ld = build_layers(d, layer_assign(d))
        assert count_crossings(order_layers(ld.layers, ld.hops), ld.hops) <= count_crossings(ld.layers, ld.hops)


def chromatic_number(intervals):
    """Smallest k admitting a proper colouring, by exhaustive search."""
    keys = list(intervals)
    overlap = {
        (a, b)
        for a, b in itertools.combinations(keys, 2)
        if intervals[a][0] <= intervals[b][1] and intervals[b][0] <= intervals[a][1]
    }
    for k in range(1, len(keys) + 1):
        for colors in itertools.product(range(k), repeat=len(keys)):
            c = dict(zip(keys, colors))
            if all(c[a] != c[b] for a, b in overlap):
                return k
    return 0


def test_three_overlapping_intervals():
    iv = {"a": (0, 4), "b": (1, 5), "c": (2, 3)}
    colors = color_intervals(iv)
    assert len(set(colors.values())) == 3 == chromatic_number(iv)


def test_coloring_optimal_random():
    rng = random.Random(3)
    for _ in range(300):
        n = rng.randint(1, 6)
        iv = {}
        for i in range(n):
            lo = rng.randint(0, 8)
            iv[i] = (lo, lo + rng.randint(0, 4))
        colors = color_intervals(iv)
        assert len(set(colors.values())) == chromatic_number(iv)


def test_coloring_optimal_on_fixture_channels(lisp, json_grammar):
    for g in (lisp, json_grammar):
        sys = grammar_to_nfa(g)
        for s in (sys, optimize(sys)[0]):
            for d, ld in all_drawings(s).values():
                for ch, iv in ld.channel_intervals.items():
                    if len(iv) <= 6:
                        used = {ld.connector_columns[ch][k] for k in iv}
                        assert len(used) == chromatic_number(iv)


def test_metrics(lisp):
    sys = grammar_to_nfa(lisp)
    m = compute_metrics([ld for _, ld in all_drawings(sys).values()], sys)
    assert (m.tokens, m.components) == (19, 6)
    opt, _ = optimize(sys)
    m2 = compute_metrics([ld for _, ld in all_drawings(opt).values()], opt)
    assert (m2.tokens, m2.components) == (9, 1)
    assert m.area > 0 and m2.area > 0


def test_epsilon_only_area():
    sys = grammar_to_nfa(parse_grammar("A ::= ;"))
    d = sys.graphs["A"]
    ld = layout_digraph(d)
    assert ld.n_rows == 1
    assert compute_metrics([ld], sys).tokens == 0


def test_layout_deterministic(json_grammar):
    sys, _ = optimize(grammar_to_nfa(json_grammar))
    for d in sys.graphs.values():
        a, b = layout_digraph(d), layout_digraph(d.copy())
        assert (a.coords, a.routes, a.n_rows, a.n_cols) == (b.coords, b.routes, b.n_rows, b.n_cols)
