"""Syntax (railroad) diagrams from context-free grammars."""

from .grammar_io import (
    CharClass,
    EmptyGrammar,
    Grammar,
    GrammarError,
    GrammarSyntaxError,
    Nonterminal,
    Production,
    Terminal,
    UndefinedNonterminal,
    load_grammar,
    parse_grammar,
    serialize_grammar,
)
from .nfa_core import Edge, NfaSystem, StDigraph, count_symbols, grammar_to_nfa, nfa_to_grammar, validate_system

__all__ = [
    "CharClass",
    "EmptyGrammar",
    "Grammar",
    "GrammarError",
    "GrammarSyntaxError",
    "Nonterminal",
    "Production",
    "Terminal",
    "UndefinedNonterminal",
    "load_grammar",
    "parse_grammar",
    "serialize_grammar",
    "Edge",
    "NfaSystem",
    "StDigraph",
    "count_symbols",
    "grammar_to_nfa",
    "nfa_to_grammar",
    "validate_system",
]

__version__ = "0.1.0"
