"""Bounded language checks for grammars and NFA systems.

Everything here works on :class:`~railcar.grammar_io.Grammar` values only; an
:class:`~railcar.nfa_core.NfaSystem` is first translated with
:func:`~railcar.nfa_core.nfa_to_grammar`.  That keeps the checker independent of
the graph transformations it is used to verify.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grammar_io import CharClass, Grammar, Nonterminal, Terminal
from .nfa_core import NfaSystem, nfa_to_grammar

__all__ = [
    "BudgetExceeded",
    "LanguageSample",
    "Recognizer",
    "membership",
    "enumerate_language",
    "enumerate_by_derivation",
    "systems_equivalent",
    "default_alphabet",
]

MAX_LEN_GUARD = 8
DEFAULT_BUDGET = 10_000_000


class BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class LanguageSample:
    alphabet: tuple
    max_len: int
    accepted: frozenset

    def __post_init__(self):
        for w in self.accepted:
            if len(w) > self.max_len or any(c not in self.alphabet for c in w):
                raise ValueError(f"{w!r} is outside the sample bounds")


def _as_grammar(x) -> Grammar:
    return nfa_to_grammar(x) if isinstance(x, NfaSystem) else x


class Recognizer:
    """Earley recognizer over single characters.

    Multi-character terminals are split into one scan item per character and
    nullable nonterminals are skipped at prediction time, so epsilon-dense
    grammars and left/right recursion are handled without normalization.
    """

    def __init__(self, g: Grammar):
        self.grammar = g
        names = list(g.nonterminals)
        self.index = {n: i for i, n in enumerate(names)}
        self.prods = []  # (lhs, items)
        self.by_lhs = [[] for _ in names]
        for p in g.rules:
            items = []
            for sym in p.rhs:
                if isinstance(sym, Nonterminal):
                    items.append(("n", self.index[sym.name]))
                elif isinstance(sym, CharClass):
                    items.append(("r", sym.lo, sym.hi))
                else:
                    items.extend(("c", ch) for ch in sym.text)
            self.by_lhs[self.index[p.lhs]].append(len(self.prods))
            self.prods.append((self.index[p.lhs], tuple(items)))
        # augmented start production S' -> S
        self.start_prod = len(self.prods)
        self.prods.append((-1, (("n", self.index[g.start]),)))
        self.nullable = self._nullable()

    def _nullable(self):
        nullable = set()
        changed = True
        while changed:
            changed = False
            for lhs, items in self.prods:
                if lhs >= 0 and lhs not in nullable and all(it[0] == "n" and it[1] in nullable for it in items):
                    nullable.add(lhs)
                    changed = True
        return nullable

    # A chart set is (items, waiting) where waiting maps a nonterminal to the
    # items whose dot sits before it.

    def _close(self, seeds, chart):
        pos = len(chart)
        items = set()
        waiting = {}
        agenda = []

        def add(it):
            if it not in items:
                items.add(it)
                agenda.append(it)

        for it in seeds:
            add(it)
        while agenda:
            p, dot, origin = agenda.pop()
            rhs = self.prods[p][1]
            if dot < len(rhs):
                kind = rhs[dot]
                if kind[0] != "n":
                    continue
                nt = kind[1]
                waiting.setdefault(nt, []).append((p, dot, origin))
                for q in self.by_lhs[nt]:
                    add((q, 0, pos))
                if nt in self.nullable:
                    add((p, dot + 1, origin))
            else:
                lhs = self.prods[p][0]
                if lhs < 0:
                    continue
                if origin == pos:
                    parents = waiting.get(lhs, [])
                    # items predicted later in this set are covered by the
                    # nullable shortcut above
                else:
                    parents = chart[origin][1].get(lhs, [])
                for pp, pdot, porigin in list(parents):
                    add((pp, pdot + 1, porigin))
        return items, waiting

    def initial(self):
        return [self._close([(self.start_prod, 0, 0)], [])]

    def step(self, chart, ch):
        """Scan ``ch`` and return the new chart set (possibly empty)."""
        seeds = []
        for p, dot, origin in chart[-1][0]:
            rhs = self.prods[p][1]
            if dot < len(rhs):
                it = rhs[dot]
                if (it[0] == "c" and it[1] == ch) or (it[0] == "r" and it[1] <= ch <= it[2]):
                    seeds.append((p, dot + 1, origin))
        return self._close(seeds, chart)

    def accepts(self, chart):
        return (self.start_prod, 1, 0) in chart[-1][0]

    def recognize(self, w: str) -> bool:
        chart = self.initial()
        for ch in w:
            nxt = self.step(chart, ch)
            if not nxt[0]:
                return False
            chart.append(nxt)
        return self.accepts(chart)


def membership(g, w: str) -> bool:
    """True iff ``w`` is derivable from the start symbol of ``g``."""
    return Recognizer(_as_grammar(g)).recognize(w)


def _check_budget(alphabet, max_len, budget):
    if max_len > MAX_LEN_GUARD:
        raise ValueError(f"max_len {max_len} exceeds the guard of {MAX_LEN_GUARD}")
    if len(alphabet) ** max_len > budget:
        raise BudgetExceeded(f"{len(alphabet)}^{max_len} candidate strings exceed budget {budget}")


def enumerate_language(g, alphabet, max_len: int, budget: int = DEFAULT_BUDGET) -> LanguageSample:
    """All strings of length <= max_len over ``alphabet`` in the language.

    Walks the prefix tree depth first, extending one Earley chart; a prefix
    whose chart set is empty has no extension in the language and is pruned.
    """
    alphabet = tuple(sorted(set(alphabet)))
    _check_budget(alphabet, max_len, budget)
    rec = Recognizer(_as_grammar(g))
    accepted = set()
    chart = rec.initial()

    def walk(prefix):
        if rec.accepts(chart):
            accepted.add(prefix)
        if len(prefix) == max_len:
            return
        for ch in alphabet:
            nxt = rec.step(chart, ch)
            if nxt[0]:
                chart.append(nxt)
                walk(prefix + ch)
                chart.pop()

    walk("")
    return LanguageSample(alphabet, max_len, frozenset(accepted))


def enumerate_by_derivation(g, alphabet, max_len: int, budget: int = DEFAULT_BUDGET) -> LanguageSample:
    """Same contract as :func:`enumerate_language`, by bounded derivation.

    Computes, for every nonterminal, the set of its short yields as a least
    fixpoint, truncating concatenations at ``max_len``.
    """
    alphabet = tuple(sorted(set(alphabet)))
    _check_budget(alphabet, max_len, budget)
    g = _as_grammar(g)
    lang = {n: set() for n in g.nonterminals}

    def yields(sym):
        if isinstance(sym, Nonterminal):
            return lang[sym.name]
        if isinstance(sym, CharClass):
            return {c for c in alphabet if c in sym}
        return {sym.text} if all(c in alphabet for c in sym.text) and len(sym.text) <= max_len else set()

    changed = True
    while changed:
        changed = False
        for p in g.rules:
            acc = {""}
            for sym in p.rhs:
                ys = yields(sym)
                acc = {a + b for a in acc for b in ys if len(a) + len(b) <= max_len}
                if not acc:
                    break
            new = acc - lang[p.lhs]
            if new:
                lang[p.lhs] |= new
                changed = True
    return LanguageSample(alphabet, max_len, frozenset(lang[g.start]))


def systems_equivalent(a, b, alphabet, max_len: int, budget: int = DEFAULT_BUDGET):
    """Compare two languages up to ``max_len``.

    Returns ``(True, None)`` or ``(False, witness)`` where ``witness`` is a
    shortest string accepted by exactly one side (ties broken lexically).
    """
    la = enumerate_language(a, alphabet, max_len, budget).accepted
    lb = enumerate_language(b, alphabet, max_len, budget).accepted
    diff = la ^ lb
    if not diff:
        return True, None
    return False, min(diff, key=lambda w: (len(w), w))


def default_alphabet(g) -> str:
    """Characters of all terminals, with ranges reduced to their endpoints."""
    g = _as_grammar(g)
    chars = set()
    for sym in g.terminals:
        if isinstance(sym, CharClass):
            chars.update((sym.lo, sym.hi))
        elif isinstance(sym, Terminal):
            chars.update(sym.text)
    return "".join(sorted(chars))
