"""``regrew`` command-line tool.

Exit codes: 0 success/equal, 1 negative finding or invalid input,
2 resource limit or inconclusive, 3 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from .cd import cd_membership_witness, enumerate_bounded_cd, trace_document
from .derivation import ContractError, ResourceLimit, enumerate_bounded, max_forms_setting, membership_witness
from .dsl import GrammarSyntaxError, grammar_digest, load_grammar, parse_grammar, render_grammar
from .equivalence import GrammarShape, bounded_equiv, fuzz_pipeline
from .grammar import CDSystem
from .symbols import Atom
from .transforms import OPS, TransformError, apply_transform, run_pipeline
from .validate import validate_grammar

EXIT_OK, EXIT_NEGATIVE, EXIT_LIMIT, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")

    def exit(self, status=0, message=None):
        if status:
            raise UsageError(message or "")
        raise _HelpExit(message or "")


class _HelpExit(Exception):
    pass


@dataclass
class CommandOutcome:
    code: int
    output: str
    diagnostics: str


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="regrew", description="Regulated rewriting workbench.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="check well-formedness and classify the grammar")
    s.add_argument("file")

    s = sub.add_parser("stats", help="alphabet and production counts")
    s.add_argument("file")

    s = sub.add_parser("enum", help="list words up to a length bound")
    s.add_argument("file")
    s.add_argument("--bound", type=_positive, required=True)
    s.add_argument("--json", action="store_true", help="emit a structured document")
    s.add_argument("--trace", metavar="OUT", help="cd systems: write the t-step trace here")

    s = sub.add_parser("member", help="derivation witness for a word")
    s.add_argument("file")
    s.add_argument("--word", required=True, help='space-separated terminal names, e.g. "a b a"')

    s = sub.add_parser("transform", help="apply one construction")
    s.add_argument("file")
    s.add_argument("--op", required=True, choices=sorted(OPS))
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--prune-unreachable", action="store_true")
    s.add_argument("--clauses", action="store_true", help="include per-production clause tags in the report")

    s = sub.add_parser("pipeline", help="apply comma-separated constructions in order")
    s.add_argument("file")
    s.add_argument("--ops", required=True)
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--prune-unreachable", action="store_true")

    s = sub.add_parser("equiv", help="compare two bounded languages")
    s.add_argument("first")
    s.add_argument("second")
    s.add_argument("--bound", type=_positive, required=True)

    s = sub.add_parser("fuzz", help="random grammars through a pipeline")
    s.add_argument("--kind", default="rc", choices=["rc", "sc", "permitting", "forbidding"])
    s.add_argument("--mode", default="", choices=["", "def1", "def2"])
    s.add_argument("--count", type=_positive, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--bound", type=_positive, default=4)
    s.add_argument("--ops", default="", help="comma-separated transform names (empty = identity)")
    s.add_argument("--nonterminals", type=_positive, default=3)
    s.add_argument("--terminals", type=_positive, default=2)
    s.add_argument("--productions", type=_positive, default=4)
    s.add_argument("--max-rhs", type=_positive, default=2)
    s.add_argument("--per-density", type=float, default=0.3)
    s.add_argument("--forb-density", type=float, default=0.3)
    s.add_argument("--production-limited", action="store_true")
    s.add_argument("--workers", type=_positive, default=1)
    return p


def _write_grammar(g, path):
    text = render_grammar(g)
    if parse_grammar(text) != g:
        raise TransformError("rendered output does not parse back to the same structure")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _ops(text: str) -> list:
    return [x.strip() for x in text.split(",") if x.strip()]


def _cmd_validate(a, out, err):
    g = load_grammar(a.file)
    rep = validate_grammar(g)
    out.write(_dump(rep.to_dict()))
    return EXIT_OK if rep.ok else EXIT_NEGATIVE


def _cmd_stats(a, out, err):
    g = load_grammar(a.file)
    d = {
        "kind": g.kind,
        "mode": g.mode,
        "nonterminals": len(g.nonterminals),
        "terminals": len(g.terminals),
        "productions": len(g.all_productions()),
        "digest": grammar_digest(g),
        "classification": validate_grammar(g).classification,
    }
    if isinstance(g, CDSystem):
        d["components"] = {n: len(c) for n, c in zip(g.names, g.components)}
    elif g.kind == "sc":
        d["degree"] = list(g.degree)
    out.write(_dump(d))
    return EXIT_OK


def _cmd_enum(a, out, err):
    g = load_grammar(a.file)
    trace = [] if (a.trace and isinstance(g, CDSystem)) else None
    if a.trace and trace is None:
        raise UsageError("--trace applies to cd systems only")
    if isinstance(g, CDSystem):
        s = enumerate_bounded_cd(g, a.bound, trace=trace)
    else:
        s = enumerate_bounded(g, a.bound)
    s.digest = grammar_digest(g)
    if trace is not None:
        with open(a.trace, "w", encoding="utf-8") as fh:
            fh.write(trace_document(trace))
    if a.json:
        out.write(s.to_json())
    else:
        out.write(f"# bound={s.bound} max_forms={s.max_forms} truncated={str(s.truncated).lower()} words={len(s.words)}\n")
        for w in s.word_strings():
            out.write(w + "\n")
    if s.truncated:
        err.write(f"state cap {s.max_forms} reached; the word list is incomplete\n")
        return EXIT_LIMIT
    return EXIT_OK


def _cmd_member(a, out, err):
    g = load_grammar(a.file)
    names = a.word.split()
    if not names:
        raise UsageError("--word must name at least one terminal")
    by_name = {t.name: t for t in g.terminals if isinstance(t, Atom)}
    unknown = [x for x in names if x not in by_name]
    if unknown:
        err.write(f"not terminals of the grammar: {', '.join(unknown)}\n")
        return EXIT_NEGATIVE
    word = tuple(by_name[x] for x in names)
    if isinstance(g, CDSystem):
        steps = cd_membership_witness(g, word)
    else:
        steps = membership_witness(g, word)
    doc = {"word": a.word.strip(), "member": steps is not None, "max_forms": max_forms_setting()}
    doc["steps"] = [s.to_dict() for s in steps] if steps else []
    out.write(_dump(doc))
    return EXIT_OK if steps is not None else EXIT_NEGATIVE


def _cmd_transform(a, out, err):
    g = load_grammar(a.file)
    res, rep = apply_transform(a.op, g, prune=a.prune_unreachable)
    _write_grammar(res, a.output)
    d = rep.to_dict(full=a.clauses)
    d["postconditions"] = validate_grammar(res).classification
    out.write(_dump(d))
    return EXIT_OK


def _cmd_pipeline(a, out, err):
    g = load_grammar(a.file)
    log: list = []
    res, reps = run_pipeline(g, _ops(a.ops), prune=a.prune_unreachable, log=log)
    for line in log:
        err.write(line + "\n")
    _write_grammar(res, a.output)
    out.write(_dump({"stages": [r.to_dict() for r in reps], "inserted": log, "postconditions": validate_grammar(res).classification}))
    return EXIT_OK


def _cmd_equiv(a, out, err):
    g1, g2 = load_grammar(a.first), load_grammar(a.second)
    v = bounded_equiv(g1, g2, a.bound)
    d = v.to_dict()
    d["first"], d["second"] = grammar_digest(g1), grammar_digest(g2)
    d["max_forms"] = max_forms_setting()
    out.write(_dump(d))
    return {"equal": EXIT_OK, "counterexample": EXIT_NEGATIVE}.get(v.status, EXIT_LIMIT)


def _cmd_fuzz(a, out, err):
    cfg = GrammarShape(
        kind=a.kind,
        mode=a.mode,
        nonterminals=a.nonterminals,
        terminals=a.terminals,
        productions=a.productions,
        max_rhs=a.max_rhs,
        per_density=a.per_density,
        forb_density=a.forb_density,
        production_limited=a.production_limited,
    )
    try:
        cfg.check()
    except ValueError as e:
        raise UsageError(str(e)) from None
    rep = fuzz_pipeline(cfg, _ops(a.ops), a.count, a.bound, seed=a.seed, workers=a.workers)
    d = rep.to_dict()
    d["max_forms"] = max_forms_setting()
    out.write(_dump(d))
    t = rep.totals()
    if t["counterexample"] or t["error"]:
        return EXIT_NEGATIVE
    return EXIT_LIMIT if t["inconclusive"] else EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "stats": _cmd_stats,
    "enum": _cmd_enum,
    "member": _cmd_member,
    "transform": _cmd_transform,
    "pipeline": _cmd_pipeline,
    "equiv": _cmd_equiv,
    "fuzz": _cmd_fuzz,
}


def run_cli(argv: Sequence[str], out: Optional[io.TextIOBase] = None, err: Optional[io.TextIOBase] = None) -> CommandOutcome:
    """Run one command; output and diagnostics are captured unless streams are given."""
    cap_out = io.StringIO() if out is None else None
    cap_err = io.StringIO() if err is None else None
    o = out if out is not None else cap_out
    e = err if err is not None else cap_err
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
        code = _COMMANDS[args.command](args, o, e)
    except _HelpExit as h:
        o.write(parser.format_help() if not str(h) else str(h))
        code = EXIT_OK
    except UsageError as u:
        e.write(str(u).rstrip() + "\n")
        code = EXIT_USAGE
    except GrammarSyntaxError as x:
        e.write(f"syntax error: {x}\n")
        code = EXIT_NEGATIVE
    except (TransformError, ContractError, ValueError) as x:
        e.write(f"error: {x}\n")
        code = EXIT_NEGATIVE
    except ResourceLimit as x:
        e.write(f"resource limit: {x}\n")
        code = EXIT_LIMIT
    except OSError as x:
        e.write(f"error: {x}\n")
        code = EXIT_NEGATIVE
    return CommandOutcome(
        code,
        cap_out.getvalue() if cap_out is not None else "",
        cap_err.getvalue() if cap_err is not None else "",
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    res = run_cli(sys.argv[1:] if argv is None else argv, sys.stdout, sys.stderr)
    return res.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
