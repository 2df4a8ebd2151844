"""Structural well-formedness checks and shape classification."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .grammar import CDSystem, Grammar
from .symbols import Atom, describe

__all__ = ["Violation", "ValidationReport", "validate_grammar", "CODES"]

CODES = (
    "E_EMPTY_RHS",
    "E_LHS_NOT_NONTERMINAL",
    "E_UNKNOWN_SYMBOL",
    "E_ALPHABET_OVERLAP",
    "E_START",
    "E_SYMBOL_CLASS",
    "E_TERMINAL_CONSTRUCTED",
    "E_RC_CONDITION",
    "E_SC_DEGREE",
    "E_SC_CARDINALITY",
    "E_PERMITTING_FORB",
    "E_FORBIDDING_PER",
    "E_EMPTY_CONDITION",
    "E_DUPLICATE_LABEL",
    "E_EMPTY_COMPONENT",
    "E_NO_COMPONENTS",
)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    location: str

    def to_dict(self):
        return {"code": self.code, "message": self.message, "location": self.location}


@dataclass
class ValidationReport:
    ok: bool
    violations: list
    classification: dict = field(default_factory=dict)

    def codes(self) -> set:
        return {v.code for v in self.violations}

    def to_dict(self):
        return {
            "ok": self.ok,
            "violations": [v.to_dict() for v in self.violations],
            "classification": dict(self.classification),
        }


def validate_grammar(g: Union[Grammar, CDSystem]) -> ValidationReport:
    out: list = []

    def bad(code, msg, loc="grammar"):
        out.append(Violation(code, msg, loc))

    N, T = g.nonterminals, g.terminals
    V = N | T
    for s in sorted(N & T, key=describe):
        bad("E_ALPHABET_OVERLAP", f"{describe(s)} is both terminal and nonterminal")
    for s in sorted(T, key=describe):
        if not isinstance(s, Atom):
            bad("E_TERMINAL_CONSTRUCTED", f"constructed symbol {describe(s)} declared terminal")
        elif not s.terminal:
            bad("E_SYMBOL_CLASS", f"{describe(s)} is a nonterminal atom in the terminal set")
    for s in sorted(N, key=describe):
        if s.terminal:
            bad("E_SYMBOL_CLASS", f"{describe(s)} is a terminal atom in the nonterminal set")
    if g.start not in N:
        bad("E_START", f"start symbol {describe(g.start)} is not a nonterminal")

    if isinstance(g, CDSystem):
        if not g.components:
            bad("E_NO_COMPONENTS", "cd system has no components")
        located = []
        for name, comp in zip(g.names, g.components):
            if not comp:
                bad("E_EMPTY_COMPONENT", f"component {name} is empty", f"component {name}")
            located.extend((p, f"component {name}, production {p.label}") for p in comp)
        kind = "rc"
    else:
        located = [(p, f"production {p.label}") for p in g.productions]
        kind = g.kind

    labels: set = set()
    for p, loc in located:
        if p.label in labels or p.label < 1:
            bad("E_DUPLICATE_LABEL", f"label {p.label} is repeated or not positive", loc)
        labels.add(p.label)
        if not p.rhs:
            bad("E_EMPTY_RHS", "empty right-hand side", loc)
        if p.lhs not in N:
            bad("E_LHS_NOT_NONTERMINAL", f"lhs {describe(p.lhs)} is not a nonterminal", loc)
        for s in p.symbols():
            if s not in V:
                bad("E_UNKNOWN_SYMBOL", f"symbol {describe(s)} is not in the alphabet", loc)
        for c in p.per | p.forb:
            if len(c) == 0:
                bad("E_EMPTY_CONDITION", "empty condition string", loc)
        if kind == "sc":
            i, j = g.degree
            if len(p.per) > 1 or len(p.forb) > 1:
                bad("E_SC_CARDINALITY", "at most one permitting and one forbidding string", loc)
            if any(len(c) > i for c in p.per) or any(len(c) > j for c in p.forb):
                bad("E_SC_DEGREE", f"condition longer than degree ({i},{j})", loc)
        else:
            for c in p.per | p.forb:
                if len(c) != 1 or c[0] not in N:
                    bad("E_RC_CONDITION", "random context conditions are single nonterminals", loc)
                    break
        if kind == "permitting" and p.forb:
            bad("E_PERMITTING_FORB", "permitting grammar with a forbidding condition", loc)
        if kind == "forbidding" and p.per:
            bad("E_FORBIDDING_PER", "forbidding grammar with a permitting condition", loc)

    prods = [p for p, _ in located]
    return ValidationReport(not out, out, classify(prods, N, T))


def classify(prods, N, T) -> dict:
    def singletons_in_n(cs):
        return all(len(c) == 1 and c[0] in N for c in cs)

    def plimited(p):
        if len(p.rhs) == 1 and p.rhs[0] in T:
            return not p.per and not p.forb
        if len(p.rhs) in (1, 2) and all(s in N for s in p.rhs):
            return singletons_in_n(p.per) and singletons_in_n(p.forb)
        return False

    pl = all(plimited(p) for p in prods)
    return {
        "production_limited": pl,
        "limited": pl and all(len(p.per) <= 1 and len(p.forb) <= 1 for p in prods),
        "max_per": max((len(p.per) for p in prods), default=0),
        "max_forb": max((len(p.forb) for p in prods), default=0),
        "max_per_length": max((len(c) for p in prods for c in p.per), default=0),
        "max_forb_length": max((len(c) for p in prods for c in p.forb), default=0),
        "permitting": all(not p.forb for p in prods),
        "forbidding": all(not p.per for p in prods),
        "lhs_not_in_forbidding": all((p.lhs,) not in p.forb for p in prods),
        "context_free": all(p.context_free for p in prods),
        "productions": len(prods),
    }
