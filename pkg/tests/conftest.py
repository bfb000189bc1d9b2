import random
import sys
from pathlib import Path

import pytest

from railcar import CharClass, Grammar, Nonterminal, Production, StDigraph, Terminal, load_grammar, parse_grammar

FIXTURES = Path(__file__).parent / "fixtures"

LISP_ALPHABET = "(),.A1"
JSON_ALPHABET = '[]",0.e-'

# Small grammars exercising one feature each; (name, source, alphabet).
SYNTHETIC = [
    ("tail-recursion", 'L ::= | "a" L ;', "ab"),
    ("left-recursion", 'L ::= L "a" | "b" ;', "ab"),
    ("parallel-symbols", 'P ::= "x" "a" | "x" "b" | "c" "y" | "d" "y" ;', "abcdxy"),
    (
        "eps-biclique",
        'X ::= "e" D | "e" "+" D | "e" "-" D | "E" D | "E" "+" D | "E" "-" D ;\nD ::= "1" | "1" D ;',
        "eE+-1",
    ),
    ("nesting-chain", 'A ::= "a" B ;\nB ::= "b" C ;\nC ::= "c" | ;', "abc"),
    ("balanced", 'P ::= | "(" P ")" P ;', "()"),
    ("nullable", 'N ::= A B ;\nA ::= | "a" ;\nB ::= | "b" A ;', "ab"),
    ("multichar", 'K ::= "if" K "fi" | "x" ;', "ifx"),
    ("char-class", "W ::= C | C W ;\nC ::= 'a'..'c' | '0'..'1' ;", "ab01z"),
    ("shared-tail", 'S ::= "a" T | "b" T | "c" ;\nT ::= "x" | "y" ;', "abcxy"),
]


def make_digraph(edges, s=0, t=None):
    """StDigraph from (src, dst, label) triples; label is a str, a Nonterminal,
    a CharClass, None for epsilon, or ('rev', None) for a reversed epsilon edge."""
    d = StDigraph(s, t if t is not None else max(max(a, b) for a, b, _ in edges))
    for a, b, lab in edges:
        d.vertices.update((a, b))
        rev = False
        if isinstance(lab, tuple):
            rev, lab = True, None
        elif isinstance(lab, str):
            lab = Terminal(lab)
        d.add_edge(a, b, lab, rev)
    return d


@pytest.fixture(scope="session")
def lisp():
    return load_grammar(FIXTURES / "lisp15.rr")


@pytest.fixture(scope="session")
def json_grammar():
    return load_grammar(FIXTURES / "json.rr")


def exponent_digraph():
    """Exponent part of a number after the two squishes: an epsilon K2,2
    between the letter and the sign."""
    return make_digraph(
        [
            (0, 1, None),
            (1, 2, "e"),
            (1, 3, "E"),
            (2, 4, None),
            (2, 5, None),
            (3, 4, None),
            (3, 5, None),
            (4, 6, "+"),
            (5, 6, "-"),
            (6, 7, "d"),
            (7, 8, None),
        ]
    )


def random_grammar(rng: random.Random) -> Grammar:
    """At most 5 nonterminals with at most 4 productions each."""
    names = [f"N{i}" for i in range(rng.randint(1, 5))]
    terms = [Terminal(c) for c in "abc"] + [CharClass("x", "z")]
    rules = []
    for n in names:
        for _ in range(rng.randint(1, 4)):
            rhs = []
            for _ in range(rng.randint(0, 3)):
                if rng.random() < 0.4:
                    rhs.append(Nonterminal(rng.choice(names)))
                else:
                    rhs.append(rng.choice(terms))
            rules.append(Production(n, tuple(rhs)))
    return Grammar.from_rules(rules, names[0])


def synthetic(name) -> Grammar:
    src = next(s for n, s, _ in SYNTHETIC if n == name)
    return parse_grammar(src)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
