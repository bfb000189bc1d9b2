"""Context-free grammars and the ``.rr`` text format.

A grammar file is a sequence of rules and an optional start directive::

    # comment to end of line
    start S-expression ;
    S-expression ::= atomic-symbol
                   | "(" S-expression "." S-expression ")"
                   | "(" S-expression-list ")" ;
    LETTER ::= 'A'..'Z' ;

Terminals are quoted with ``"`` or ``'``; ``'A'..'Z'`` is a single-character
range that occupies one terminal symbol.  An empty alternative is the empty
string.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Iterable, Union

__all__ = [
    "Terminal",
    "CharClass",
    "Nonterminal",
    "Symbol",
    "Production",
    "Grammar",
    "GrammarError",
    "GrammarSyntaxError",
    "UndefinedNonterminal",
    "EmptyGrammar",
    "parse_grammar",
    "serialize_grammar",
    "load_grammar",
]

NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*\Z")


@dataclass(frozen=True, order=True)
class Terminal:
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("terminal text must be nonempty")

    def __str__(self):
        return _quote(self.text)


@dataclass(frozen=True, order=True)
class CharClass:
    """One character in the inclusive code-point range ``lo..hi``."""

    lo: str
    hi: str

    def __post_init__(self):
        if len(self.lo) != 1 or len(self.hi) != 1:
            raise ValueError("character range bounds must be single characters")
        if self.lo > self.hi:
            raise ValueError(f"empty character range {self.lo!r}..{self.hi!r}")

    def __contains__(self, ch):
        return len(ch) == 1 and self.lo <= ch <= self.hi

    def __str__(self):
        return f"{_quote(self.lo, Q1)}..{_quote(self.hi, Q1)}"


@dataclass(frozen=True, order=True)
class Nonterminal:
    name: str

    def __post_init__(self):
        if not NAME_RE.match(self.name):
            raise ValueError(f"invalid nonterminal name {self.name!r}")

    def __str__(self):
        return self.name


Symbol = Union[Terminal, CharClass, Nonterminal]


@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: tuple = ()

    def __str__(self):
        return f"{self.lhs} ::= {' '.join(map(str, self.rhs))}".rstrip()


@dataclass(frozen=True)
class Grammar:
    """The 4-tuple (N, Sigma, R, S).

    ``nonterminals`` keeps first-definition order so that downstream stages
    are deterministic.
    """

    nonterminals: tuple
    terminals: frozenset
    rules: tuple
    start: str

    @classmethod
    def from_rules(cls, rules: Iterable[Production], start: str | None = None) -> "Grammar":
        rules = tuple(rules)
        if not rules:
            raise EmptyGrammar("grammar has no rules")
        names = list(dict.fromkeys(p.lhs for p in rules))
        defined = set(names)
        terminals = set()
        for p in rules:
            for sym in p.rhs:
                if isinstance(sym, Nonterminal):
                    if sym.name not in defined:
                        raise UndefinedNonterminal(sym.name)
                else:
                    terminals.add(sym)
        if start is None:
            start = rules[0].lhs
        elif start not in defined:
            raise UndefinedNonterminal(start)
        return cls(tuple(names), frozenset(terminals), rules, start)

    def productions(self, name: str) -> list:
        return [p for p in self.rules if p.lhs == name]

    def symbol_count(self) -> int:
        return sum(len(p.rhs) for p in self.rules)

    def __str__(self):
        return serialize_grammar(self)


class GrammarError(Exception):
    pass


class GrammarSyntaxError(GrammarError):
    def __init__(self, message, line, column):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class UndefinedNonterminal(GrammarError):
    def __init__(self, name):
        super().__init__(f"undefined nonterminal {name!r}")
        self.name = name


class EmptyGrammar(GrammarError):
    pass


# -- lexer -------------------------------------------------------------------

Q1, Q2 = "'", '"'
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", '"': '"', "'": "'"}
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<define>::=)
  | (?P<range>\.\.)
  | (?P<bar>\|)
  | (?P<semi>;)
  | (?P<name>[A-Za-z][A-Za-z0-9_-]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
    """,
    re.VERBOSE,
)


def _quote(text, quote=Q2):
    out = []
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == quote:
            out.append("\\" + ch)
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        else:
            out.append(ch)
    return quote + "".join(out) + quote


def _tokenize(text):
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise GrammarSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "string":
            value = _unescape(value[1:-1], line, col)
        if kind not in ("ws", "comment"):
            yield kind, value, line, col
        newlines = m.group().count("\n")
        if newlines:
            line += newlines
            line_start = pos + m.group().rindex("\n") + 1
        pos = m.end()
    yield "eof", "", line, pos - line_start + 1


def _unescape(body, line, col):
    out, i = [], 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            esc = body[i + 1]
            if esc not in _ESCAPES:
                raise GrammarSyntaxError(f"unknown escape \\{esc}", line, col + i + 1)
            out.append(_ESCAPES[esc])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, text):
        self.tokens = list(_tokenize(text))
        self.i = 0

    def peek(self, offset=0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, what):
        tok = self.next()
        if tok[0] != kind:
            self.fail(tok, f"expected {what}, found {tok[1]!r}" if tok[0] != "eof" else f"expected {what}, found end of input")
        return tok

    @staticmethod
    def fail(tok, message):
        raise GrammarSyntaxError(message, tok[2], tok[3])

    def parse(self):
        start = None
        rules = []
        while self.peek()[0] != "eof":
            tok = self.peek()
            if tok[0] == "name" and tok[1] == "start" and self.peek(1)[0] == "name":
                self.next()
                name = self.next()
                self.expect("semi", "';'")
                if start is not None:
                    self.fail(tok, "duplicate start directive")
                start = name
            else:
                rules.extend(self.rule())
        return start, rules

    def rule(self):
        lhs = self.expect("name", "rule name")[1]
        self.expect("define", "'::='")
        alts = [[]]
        while True:
            tok = self.next()
            kind = tok[0]
            if kind == "semi":
                break
            if kind == "bar":
                alts.append([])
            elif kind == "name":
                alts[-1].append(Nonterminal(tok[1]))
            elif kind == "string":
                alts[-1].append(self.terminal(tok))
            elif kind == "eof":
                self.fail(tok, f"unterminated rule {lhs!r}, expected ';'")
            else:
                self.fail(tok, f"unexpected {tok[1]!r}")
        return [Production(lhs, tuple(alt)) for alt in alts]

    def terminal(self, tok):
        if self.peek()[0] == "range":
            self.next()
            hi = self.expect("string", "range upper bound")
            if len(tok[1]) != 1 or len(hi[1]) != 1:
                self.fail(tok, "range bounds must be single characters")
            if tok[1] > hi[1]:
                self.fail(tok, f"empty range {tok[1]!r}..{hi[1]!r}")
            return CharClass(tok[1], hi[1])
        if not tok[1]:
            self.fail(tok, "empty terminal; use an empty alternative for epsilon")
        return Terminal(tok[1])


def parse_grammar(text: str) -> Grammar:
    """Parse ``.rr`` source text into a validated :class:`Grammar`."""
    start, rules = _Parser(text).parse()
    if not rules:
        raise EmptyGrammar("grammar has no rules")
    seen = set()
    for p in rules:
        if p in seen:
            warnings.warn(f"duplicate production {p}", stacklevel=2)
        seen.add(p)
    if start is not None:
        defined = {p.lhs for p in rules}
        if start[1] not in defined:
            raise UndefinedNonterminal(start[1])
        start = start[1]
    return Grammar.from_rules(rules, start)


def load_grammar(path) -> Grammar:
    with open(path, encoding="utf-8") as f:
        return parse_grammar(f.read())


def serialize_grammar(g: Grammar) -> str:
    """Render ``g`` as ``.rr`` text; consecutive rules sharing a lhs are joined."""
    lines = [f"start {g.start} ;"]
    groups = []
    for p in g.rules:
        if groups and groups[-1][0] == p.lhs:
            groups[-1][1].append(p.rhs)
        else:
            groups.append((p.lhs, [p.rhs]))
    for lhs, alts in groups:
        words = [lhs, "::="]
        for i, rhs in enumerate(alts):
            if i:
                words.append("|")
            words.extend(map(str, rhs))
        words.append(";")
        lines.append(" ".join(words))
    return "\n".join(lines)
