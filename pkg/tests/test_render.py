import json
import xml.etree.ElementTree as ET

import pytest
from conftest import SYNTHETIC, exponent_digraph

from railcar import NfaSystem, grammar_to_nfa, parse_grammar
from railcar.heuristics import OptimizerConfig, apply_pinch, optimize
from railcar.layout import layout_digraph
from railcar.oracle import enumerate_language
from railcar.render import Style, component_order, emit_svg, load_style, smooth_language, to_diagram

SVG = "{http://www.w3.org/2000/svg}"


def diagrams_of(sys, style=Style()):
    return [to_diagram(layout_digraph(sys.graphs[n]), sys.graphs[n], n, style) for n in component_order(sys)]


def labels_of(sys):
    return {(n, e.id): e.label for n, d in sys.graphs.items() for e in d.edges.values()}


def smooth(sys, alphabet, n=6):
    return smooth_language(diagrams_of(sys), labels_of(sys), alphabet, n, depth=3)


def parse_svg(text):
    root = ET.fromstring(text.encode())
    groups = root.findall(f"{SVG}g")
    boxes = [r for r in root.iter(f"{SVG}rect") if "box" in r.get("class", "")]
    return root, groups, boxes


# Small drawing fixtures: a tail-recursive list of short items, and the exponent
# K2,2 before and after the pinch.
LIST_SRC = 'L ::= | S L ;\nS ::= "a" | "b" "c" ;'


@pytest.mark.parametrize("passes", [("loopback",), None], ids=["loopback-only", "full"])
def test_smooth_paths_list_fixture(passes):
    g = parse_grammar(LIST_SRC)
    cfg = OptimizerConfig(passes=passes) if passes else OptimizerConfig()
    sys, _ = optimize(grammar_to_nfa(g), cfg)
    assert any(e.reversed for e in sys.graphs["L"].edges.values())
    assert smooth(sys, "abc") == enumerate_language(g, "abc", 6).accepted


@pytest.mark.parametrize("pinched", [False, True])
def test_smooth_paths_exponent_fixture(pinched):
    d = exponent_digraph()
    if pinched:
        d, _ = apply_pinch(d)
    sys = NfaSystem({"X": d}, "X")
    assert smooth(sys, "eE+-d") == enumerate_language(sys, "eE+-d", 6).accepted == {"e+d", "e-d", "E+d", "E-d"}


@pytest.mark.parametrize("name, src, alphabet", SYNTHETIC, ids=[s[0] for s in SYNTHETIC])
def test_smooth_paths_sound(name, src, alphabet):
    # nonterminal recursion is cut at depth 3, so only soundness holds in general
    sys, _ = optimize(grammar_to_nfa(parse_grammar(src)))
    assert smooth(sys, alphabet, 5) <= enumerate_language(sys, alphabet, 5).accepted


def test_smooth_paths_lisp(lisp):
    sys, _ = optimize(grammar_to_nfa(lisp))
    assert smooth(sys, "(),.A", 5) == enumerate_language(lisp, "(),.A", 5).accepted


def test_diagram_structure(lisp):
    sys, _ = optimize(grammar_to_nfa(lisp))
    (dg,) = diagrams_of(sys)
    d = sys.graphs["S-expression"]
    assert len(dg.boxes) == 9
    assert len(dg.junctions) == len(d.vertices)
    assert sorted(b.label for b in dg.boxes if b.kind == "terminal") == sorted(["(", ".", ")", "A…Z", "A…Z", "0…9"])
    assert sum(t.kind == "loop" for t in dg.tracks) == 2
    for t in dg.tracks:
        for seg in t.segments:
            if seg[0] == "L":
                assert seg[1] == seg[3] or seg[2] == seg[4]
            else:
                # quarter arc: equal travel in x and y
                assert abs(abs(seg[3] - seg[1]) - abs(seg[4] - seg[2])) < 1e-6


def test_loop_track_shape():
    sys, _ = optimize(grammar_to_nfa(parse_grammar('L ::= | "a" L ;')))
    (dg,) = diagrams_of(sys)
    (loop,) = [t for t in dg.tracks if t.kind == "loop"]
    headings = [loop.start_heading, loop.end_heading]
    assert headings == [(1, 0), (1, 0)]
    xs = [p[0] for p in loop.points]
    assert xs[0] > xs[-1]
    assert max(p[1] for p in loop.points) > loop.start[1]


def test_svg_counts_and_determinism(lisp):
    for opt in (False, True):
        sys = grammar_to_nfa(lisp)
        if opt:
            sys, _ = optimize(sys)
        a = emit_svg(diagrams_of(sys))
        b = emit_svg(diagrams_of(sys))
        assert a == b
        root, groups, boxes = parse_svg(a)
        assert root.get("version") == "1.1"
        assert len(groups) == len(sys.graphs)
        assert len(boxes) == sys.total_symbols()
        assert [g.find(f"{SVG}title").text for g in groups] == component_order(sys)


def test_svg_empty_system():
    sys = grammar_to_nfa(parse_grammar("A ::= ;"))
    _, groups, boxes = parse_svg(emit_svg(diagrams_of(sys)))
    assert len(groups) == 1 and boxes == []


def test_svg_escapes_text():
    sys = grammar_to_nfa(parse_grammar('A ::= "<&>" ;'))
    _, _, boxes = parse_svg(emit_svg(diagrams_of(sys)))
    assert len(boxes) == 1


def test_box_shapes():
    sys = grammar_to_nfa(parse_grammar('A ::= "x" B ;\nB ::= "y" ;'))
    svg = emit_svg(diagrams_of(sys))
    _, _, boxes = parse_svg(svg)
    kinds = {b.get("class"): b.get("rx") for b in boxes}
    assert kinds["box nonterminal"] == "0"
    assert float(kinds["box terminal"]) > 0


def test_component_order_bfs(json_grammar):
    sys = grammar_to_nfa(json_grammar)
    order = component_order(sys)
    assert order[0] == "value"
    assert order[1:7] == ["object", "array", "string", "number", "members", "elements"]
    assert sorted(order) == sorted(sys.graphs)


def test_style_file(tmp_path):
    p = tmp_path / "style.json"
    p.write_text(json.dumps({"row_height": 50, "font_size": 12}))
    st = load_style(p)
    assert (st.row_height, st.font_size, st.arc_radius) == (50, 12, 20)
    p.write_text(json.dumps({"colour": "red"}))
    with pytest.raises(ValueError, match="colour"):
        load_style(p)
    assert load_style(None) == Style()


def test_style_changes_geometry_only(lisp):
    sys, _ = optimize(grammar_to_nfa(lisp))
    wide = emit_svg(diagrams_of(sys, Style(row_height=60)), Style(row_height=60))
    _, groups, boxes = parse_svg(wide)
    assert len(boxes) == 9 and len(groups) == 1
    assert wide != emit_svg(diagrams_of(sys))
