"""Command line front end: grammar file in, railroad diagrams out.

    railcar grammar.rr -o out.svg [--no-optimize] [--metrics m.json] ...
    railcar check grammar.rr [--alphabet ...] [--max-len N]
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .grammar_io import GrammarError, load_grammar
from .heuristics import PASS_NAMES, OptimizerConfig, optimize
from .layout import compute_metrics, drawing_to_dict, layout_digraph
from .nfa_core import grammar_to_nfa, system_to_json, validate_system
from .oracle import BudgetExceeded, default_alphabet, systems_equivalent
from .render import component_order, emit_svg, load_style, to_diagram

log = logging.getLogger("railcar")

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NOT_EQUIVALENT = 0, 1, 2, 3
STAGES = ("nfa", "opt", "layout")


class Failure(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    input: Path
    output: Path | None = None
    optimize: bool = True
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    dump_stages: tuple = ()
    dump_dir: Path | None = None
    metrics: Path | None = None
    verify: bool = False
    alphabet: str | None = None
    max_len: int = 5
    style: Path | None = None


def _dump(cfg, stage, text):
    base = cfg.dump_dir or (cfg.output.parent if cfg.output else Path("."))
    path = base / f"{cfg.input.stem}.{stage}.json"
    path.write_text(text + "\n", encoding="utf-8")
    log.info("wrote %s", path)


def _verify(g, system, alphabet, max_len):
    alphabet = alphabet if alphabet is not None else default_alphabet(g)
    try:
        ok, witness = systems_equivalent(g, system, alphabet, max_len)
    except (BudgetExceeded, ValueError) as exc:
        raise Failure(f"verification aborted: {exc}", EXIT_USAGE) from exc
    if not ok:
        raise Failure(f"languages differ on {witness!r}", EXIT_NOT_EQUIVALENT)
    log.info("languages agree up to length %d over %r", max_len, alphabet)


def run(cfg: RunConfig) -> dict:
    """Execute the whole pipeline; returns the metrics record."""
    try:
        g = load_grammar(cfg.input)
    except OSError as exc:
        raise Failure(f"cannot read {cfg.input}: {exc.strerror}", EXIT_USAGE) from exc
    except GrammarError as exc:
        raise Failure(f"{cfg.input}:{exc}", EXIT_USAGE) from exc

    system = grammar_to_nfa(g)
    if "nfa" in cfg.dump_stages:
        _dump(cfg, "nfa", system_to_json(system))
    if cfg.optimize:
        system, reports = optimize(system, cfg.optimizer)
        for rep in reports:
            log.info("round=%d %s", rep.round, rep)
        if "opt" in cfg.dump_stages:
            _dump(cfg, "opt", system_to_json(system))

    problems = validate_system(system)
    if problems:
        raise Failure("invalid NFA system:\n  " + "\n  ".join(problems), EXIT_INVALID)
    if cfg.verify:
        _verify(g, system, cfg.alphabet, cfg.max_len)

    names = component_order(system)
    drawings = {name: layout_digraph(system.graphs[name]) for name in names}
    metrics = compute_metrics(drawings.values(), system)
    record = {
        "name": cfg.input.stem,
        "optimized": cfg.optimize,
        "area": metrics.area,
        "tokens": metrics.tokens,
        "components": metrics.components,
    }
    if "layout" in cfg.dump_stages:
        doc = {"graphs": {n: drawing_to_dict(drawings[n]) for n in names}, "metrics": record}
        _dump(cfg, "layout", json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False))

    if cfg.output is not None:
        try:
            style = load_style(cfg.style)
        except (OSError, ValueError, TypeError) as exc:
            raise Failure(f"bad style file: {exc}", EXIT_USAGE) from exc
        diagrams = [to_diagram(drawings[n], system.graphs[n], n, style) for n in names]
        cfg.output.write_text(emit_svg(diagrams, style), encoding="utf-8")
        log.info("wrote %s", cfg.output)
    if cfg.metrics is not None:
        cfg.metrics.write_text(json.dumps(record, sort_keys=True) + "\n", encoding="utf-8")
    return record


def _passes(text):
    names = tuple(p.strip() for p in text.split(",") if p.strip())
    bad = [p for p in names if p not in PASS_NAMES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown pass {bad[0]!r}; choose from {', '.join(PASS_NAMES)}")
    return names


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser():
    p = argparse.ArgumentParser(prog="railcar", description="Draw compact railroad diagrams for a context-free grammar.")
    p.add_argument("input", type=Path, help="grammar file (.rr)")
    p.add_argument("-o", "--output", type=Path, help="SVG file to write")
    p.add_argument("--no-optimize", dest="optimize", action="store_false", help="draw one diagram per nonterminal as written")
    p.add_argument("--max-rounds", type=_positive, default=10)
    p.add_argument("--nesting-threshold", type=_positive, default=30, metavar="K", help="largest host size after inlining (default 30)")
    p.add_argument("--passes", type=_passes, default=PASS_NAMES, help=f"comma separated, default {','.join(PASS_NAMES)}")
    p.add_argument("--dump-stage", dest="dump_stages", action="append", choices=STAGES, default=[], help="write <input>.<stage>.json (repeatable)")
    p.add_argument("--dump-dir", type=Path, help="directory for stage dumps (default: next to the output)")
    p.add_argument("--metrics", type=Path, help="write area/tokens/components as JSON")
    p.add_argument("--style", type=Path, help="JSON file overriding style constants")
    p.add_argument("--verify", action="store_true", help="check the drawn language against the grammar")
    _add_bounds(p)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _add_bounds(p):
    p.add_argument("--alphabet", help="characters to enumerate (default: taken from the grammar)")
    p.add_argument("--max-len", type=_positive, default=5, help="longest string compared (default 5)")


def check_main(argv):
    p = argparse.ArgumentParser(prog="railcar check", description="Verify that optimization preserves the language.")
    p.add_argument("input", type=Path)
    p.add_argument("--max-rounds", type=_positive, default=10)
    p.add_argument("--nesting-threshold", type=_positive, default=30)
    _add_bounds(p)
    args = p.parse_args(argv)
    cfg = RunConfig(
        args.input,
        optimizer=OptimizerConfig(args.nesting_threshold, args.max_rounds),
        verify=True,
        alphabet=args.alphabet,
        max_len=args.max_len,
    )
    record = run(cfg)
    print(f"{args.input}: ok, {record['tokens']} tokens in {record['components']} components")
    return EXIT_OK


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    verbose = "-v" in argv or "--verbose" in argv
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if verbose else logging.WARNING)
    log.propagate = False
    try:
        return _main(argv)
    finally:
        log.removeHandler(handler)


def _main(argv):
    try:
        if argv and argv[0] == "check" and not Path("check").exists():
            return check_main(argv[1:])
        args = build_parser().parse_args(argv)
        cfg = RunConfig(
            input=args.input,
            output=args.output,
            optimize=args.optimize,
            optimizer=OptimizerConfig(args.nesting_threshold, args.max_rounds, args.passes),
            dump_stages=tuple(args.dump_stages),
            dump_dir=args.dump_dir,
            metrics=args.metrics,
            verify=args.verify,
            alphabet=args.alphabet,
            max_len=args.max_len,
            style=args.style,
        )
        run(cfg)
    except SystemExit as exc:  # argparse
        return EXIT_USAGE if exc.code else EXIT_OK
    except Failure as exc:
        print(f"railcar: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
