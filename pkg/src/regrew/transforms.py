"""Constructive grammar transformations.

Every operation is a pure function from a valid input grammar/system to a
new one.  ``apply_transform`` runs an operation by its CLI name and returns a
``TransformReport`` that attributes each output production to the clause of
the construction that emitted it.

Fresh symbols are built structurally from the input symbols (see
``symbols``); priming is repeated as often as needed to stay clear of the
input alphabet, and each construction checks that its new symbols are
disjoint from the symbols it keeps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

from .grammar import CDSystem, Grammar, Production, conds, sorted_symbols
from .symbols import Indexed, Packed, Primed, SetTagged, Staged, Symbol, describe
from .validate import validate_grammar

__all__ = [
    "TransformError",
    "TransformReport",
    "OPS",
    "sc_def2_to_rc",
    "sc_def2_to_def1",
    "sc_def1_to_def2",
    "rc_def2_to_def1",
    "rc_def1_to_def2",
    "rc_normalize_forbid",
    "rc_to_permitting_cd",
    "pcd_to_sc",
    "rc_limited_normal_form",
    "apply_transform",
    "run_pipeline",
    "signature",
    "prune_unreachable",
]

RC_KINDS = ("rc", "permitting", "forbidding")
DEFAULT_CHAIN_CAP = 4096


class TransformError(ValueError):
    """Input violates a construction's precondition, or a limit was exceeded."""


class ConstructionBug(TransformError):
    """An output failed its own postcondition."""


@dataclass
class TransformReport:
    op: str
    source: object = field(repr=False)
    output: object = field(repr=False)
    clauses: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    pruned: int = 0

    @property
    def input_digest(self) -> str:
        from .dsl import grammar_digest

        return grammar_digest(self.source)

    @property
    def output_digest(self) -> str:
        from .dsl import grammar_digest

        return grammar_digest(self.output)

    def counts(self) -> dict:
        def c(g):
            return {
                "nonterminals": len(g.nonterminals),
                "terminals": len(g.terminals),
                "productions": len(g.all_productions()),
            }

        return {"before": c(self.source), "after": c(self.output)}

    def clause_totals(self) -> dict:
        totals: dict = {}
        for tag in self.clauses.values():
            totals[tag] = totals.get(tag, 0) + 1
        return totals

    def to_dict(self, full: bool = False) -> dict:
        d = {
            "op": self.op,
            "input_digest": self.input_digest,
            "output_digest": self.output_digest,
            "counts": self.counts(),
            "clause_totals": self.clause_totals(),
            "warnings": list(self.warnings),
            "pruned_productions": self.pruned,
        }
        if full:
            d["clauses"] = {str(k): v for k, v in sorted(self.clauses.items())}
        return d

    def to_json(self, full: bool = False) -> str:
        return json.dumps(self.to_dict(full), sort_keys=True, indent=2) + "\n"


# -- helpers ------------------------------------------------------------------


class _Builder:
    """Collects productions in emission order, dropping exact duplicates."""

    def __init__(self):
        self.items: list = []
        self.seen: set = set()

    def add(self, lhs, rhs, per=(), forb=(), clause=""):
        rhs = tuple(rhs)
        if not rhs:
            raise ConstructionBug(f"{clause} produced an empty rhs")
        per = per if isinstance(per, frozenset) else conds(*per)
        forb = forb if isinstance(forb, frozenset) else conds(*forb)
        key = (lhs, rhs, per, forb)
        if key in self.seen:
            return
        self.seen.add(key)
        self.items.append((key, clause))

    def emit(self, first_label: int, clauses: dict) -> tuple:
        out = []
        for offset, ((lhs, rhs, per, forb), clause) in enumerate(self.items):
            label = first_label + offset
            out.append(Production(label, lhs, rhs, per, forb))
            clauses[label] = clause
        return tuple(out)


def _prime(s: Symbol, d: int) -> Symbol:
    for _ in range(d):
        s = Primed(s)
    return s


def _primer(bases, avoid) -> Callable[[Symbol], Symbol]:
    """Uniform priming depth that maps every base outside ``avoid``."""
    bases = list(bases)
    d = 1
    while any(_prime(b, d) in avoid for b in bases):
        d += 1
    return lambda s: _prime(s, d)


def _disjoint(new, kept, what):
    clash = set(new) & set(kept)
    if clash:
        names = ", ".join(sorted(describe(s) for s in clash)[:5])
        raise TransformError(f"{what}: fresh symbols collide with existing ones ({names})")


def _require(g, kinds, mode=None, max_degree=None, what="transform"):
    if isinstance(g, CDSystem):
        if "cd" not in kinds:
            raise TransformError(f"{what} expects a grammar of kind {'/'.join(kinds)}, got a cd system")
    elif g.kind not in kinds:
        raise TransformError(f"{what} expects kind {'/'.join(kinds)}, got {g.kind}")
    if mode is not None and g.mode != mode:
        raise TransformError(f"{what} expects mode {mode}, got {g.mode}")
    if max_degree is not None and not isinstance(g, CDSystem) and g.kind == "sc":
        if g.degree[0] > max_degree[0] or g.degree[1] > max_degree[1]:
            raise TransformError(f"{what} requires degree at most {max_degree}, got {g.degree}")
    rep = validate_grammar(g)
    if not rep.ok:
        first = rep.violations[0]
        raise TransformError(f"{what}: invalid input ({first.code}: {first.message} at {first.location})")
    return rep


def _ordered(g) -> list:
    return sorted(g.all_productions(), key=lambda p: p.label)


def _single(cset) -> Optional[Symbol]:
    """The symbol of a set holding at most one length-1 condition."""
    if not cset:
        return None
    (c,) = tuple(cset)
    return c[0]


def _syms(cset) -> list:
    return sorted_symbols(c[0] for c in cset)


def _used_symbols(prods) -> set:
    out = set()
    for p in prods:
        out.update(p.symbols())
    return out


# -- semi-conditional / random context conversions -----------------------------


def _drop_self_conditions(g, b: _Builder, h=lambda s: s, tag="clause", inherited=None):
    """Delete self-forbidding rules, drop lhs from Per, apply h to what remains."""
    for p in _ordered(g):
        if inherited is not None:
            tag = inherited[p.label]
        if (p.lhs,) in p.forb:
            continue
        per = frozenset(tuple(h(s) for s in c) for c in p.per if c != (p.lhs,))
        forb = frozenset(tuple(h(s) for s in c) for c in p.forb)
        b.add(p.lhs, [h(s) for s in p.rhs], per, forb, tag)


def _sc_def2_to_rc(g, clauses, warnings):
    _require(g, ("sc",), "def2", (1, 1), "sc-to-rc")
    terms = sorted_symbols(g.terminals)
    prime = _primer(terms, g.alphabet)
    hmap = {a: prime(a) for a in terms}
    h = lambda s: hmap.get(s, s)  # noqa: E731
    b = _Builder()
    _drop_self_conditions(g, b, h, "thm1 clauses 1-3")
    n_orig = sorted_symbols(g.nonterminals)
    for a in terms:
        b.add(hmap[a], [a], (), n_orig, "thm1 clause 4")
    prods = b.emit(1, clauses)
    _disjoint(hmap.values(), g.alphabet, "sc-to-rc")
    return Grammar("rc", g.nonterminals | set(hmap.values()), g.terminals, g.start, prods, "def1")


def _sc_def2_to_def1(g, clauses, warnings, inherited=None):
    _require(g, ("sc",), "def2", (1, 1), "sc-def2to1")
    b = _Builder()
    _drop_self_conditions(g, b, tag="cor2 clauses 2-3", inherited=inherited)
    return g.replace(productions=b.emit(1, clauses), mode="def1")


def _rc_def2_to_def1(g, clauses, warnings):
    _require(g, RC_KINDS, "def2", what="rc-def2to1")
    b = _Builder()
    _drop_self_conditions(g, b, tag="rc def2to1 clauses 2-3")
    return g.replace(productions=b.emit(1, clauses), mode="def1")


def _rc_def1_to_def2(g, clauses, warnings):
    _require(g, RC_KINDS, "def1", what="rc-def1to2")
    nts = sorted_symbols(g.nonterminals)
    prime = _primer(nts, g.alphabet)
    primed = [prime(x) for x in nts]
    _disjoint(primed, g.alphabet, "rc-def1to2")
    b = _Builder()
    for p in _ordered(g):
        b.add(p.lhs, [prime(p.lhs)], (), primed, "rc def1to2 guard")
        b.add(prime(p.lhs), p.rhs, p.per, p.forb, "rc def1to2 body")
    if len(b.items) != 2 * len(g.productions):
        warnings.append(f"duplicate guard productions merged: {2 * len(g.productions) - len(b.items)}")
    return Grammar("rc", g.nonterminals | set(primed), g.terminals, g.start, b.emit(1, clauses), "def2")


def _sc_def1_to_def2(g, clauses, warnings):
    _require(g, ("sc",), "def1", (1, 1), "sc-def1to2")
    V = sorted_symbols(g.alphabet)
    nts = sorted_symbols(g.nonterminals)
    s1 = Indexed(g.start, 1)
    box = {x: Packed((x,)) for x in V}
    prime = _primer(nts, g.alphabet | {s1} | set(box.values()))
    b = _Builder()
    b.add(s1, [box[g.start]], clause="thm2 init start")
    for a in sorted_symbols(g.terminals):
        b.add(box[a], [a], clause="thm2 init terminal")
    fresh = {s1, *box.values()}
    for p in _ordered(g):
        u, v = _single(p.per), _single(p.forb)
        a_ = prime(p.lhs)
        fresh.add(a_)
        x, beta = p.rhs[0], p.rhs[1:]
        b.add(box[p.lhs], (box[x],) + beta, p.per, p.forb, "thm2 schema 1")
        for B in V:
            pb, p1b, p2b = (Staged(B, p.label, k) for k in (1, 2, 3))
            fresh.update((pb, p1b, p2b))
            b.add(box[B], [pb], clause="thm2 schema 2")
            b.add(p.lhs, [a_], [pb], [a_], "thm2 schema 3")
            b.add(pb, [p1b], [a_], (), "thm2 schema 4")
            if v != B:
                b.add(p1b, [p2b], p.per, p.forb, "thm2 schema 5")
                if u == B:
                    b.add(p1b, [p2b], (), p.forb, "thm2 schema 6")
            b.add(a_, p.rhs, [p2b], (), "thm2 schema 7")
            b.add(p2b, [box[B]], (), [a_], "thm2 schema 8")
    _disjoint(fresh, g.alphabet, "sc-def1to2")
    prods = b.emit(1, clauses)
    return Grammar("sc", g.nonterminals | fresh, g.terminals, s1, prods, "def2", (1, 1))


# -- random context normal forms ----------------------------------------------


def _rc_normalize_forbid(g, clauses, warnings):
    _require(g, RC_KINDS, "def1", what="lemma1")
    nts = sorted_symbols(g.nonterminals)
    prime = _primer(nts, g.alphabet)
    primed = [prime(x) for x in nts]
    _disjoint(primed, g.alphabet, "lemma1")
    b = _Builder()
    for p in _ordered(g):
        b.add(p.lhs, [prime(p.lhs)], (), primed, "lemma1 guard")
        b.add(prime(p.lhs), p.rhs, p.per, p.forb, "lemma1 body")
    out = Grammar("rc", g.nonterminals | set(primed), g.terminals, g.start, b.emit(1, clauses), "def1")
    if not validate_grammar(out).classification["lhs_not_in_forbidding"]:
        raise ConstructionBug("lemma1 output has a production whose lhs is forbidden")
    return out


def _rc_to_permitting_cd(g, clauses, warnings):
    _require(g, RC_KINDS, "def1", what="lemma2")
    prods = _ordered(g)
    for p in prods:
        if (p.lhs,) in p.forb:
            raise TransformError(f"lemma2 needs lhs outside For; production {p.label} violates it (run lemma1 first)")
    n = len(prods)
    N = sorted_symbols(g.nonterminals)
    T = g.terminals

    def idx(X, i):
        return Indexed(X, i)

    def h(i, x):
        return tuple(s if s in T else Indexed(s, i) for s in x)

    packed = {(i, j): Packed(h(i, prods[j - 1].rhs)) for i in range(1, n + 1) for j in range(1, n + 1)}
    fresh = {idx(X, i) for X in N for i in range(1, n + 1)}
    fresh |= {Primed(idx(X, i)) for X in N for i in range(1, n + 1)}
    fresh |= set(packed.values())
    for i, p in enumerate(prods, 1):
        fresh |= {Staged(p.lhs, i, j) for j in range(1, len(p.per) + 2)}
    start = _primer([g.start], fresh | g.alphabet)(g.start)
    _disjoint(fresh, T, "lemma2")

    names = ["P0"]
    comps = []
    p0 = _Builder()
    for i in range(1, n + 1):
        p0.add(start, [idx(g.start, i)], clause="lemma2 P0 start")
    for i in range(1, n + 1):
        for X in N:
            p0.add(Primed(idx(X, i)), [idx(X, i)], clause="lemma2 P0 unprime")
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            p0.add(packed[(i, j)], h(i, prods[j - 1].rhs), clause="lemma2 P0 unpack")
    comps.append(p0)

    for i, p in enumerate(prods, 1):
        A = p.lhs
        per = _syms(p.per)
        forb = set(_syms(p.forb))
        k = len(per)
        hx = packed[(i, i)]
        c = _Builder()
        c.add(idx(A, i), [Staged(A, i, 1)], clause="lemma2 group 1")
        for j, Xj in enumerate(per, 1):
            c.add(Staged(A, i, j), [Staged(A, i, j + 1)], [idx(Xj, i)], clause="lemma2 group 2")
        c.add(Staged(A, i, k + 1), [hx], clause="lemma2 group 3")
        c.add(hx, [hx], [hx], clause="lemma2 group 4")
        for X in N:
            if X in forb:
                c.add(idx(X, i), [idx(X, i)], clause="lemma2 group 5")
        for X in N:
            if X not in forb:
                c.add(idx(X, i), [Primed(idx(X, i))], [hx], clause="lemma2 group 6")
        for j in range(1, k + 1):
            c.add(Staged(A, i, j), [Staged(A, i, j)], clause="lemma2 group 7")
        bar = _Builder()
        for X in N:
            for j in range(1, n + 1):
                bar.add(idx(X, i), [idx(X, j)], clause="lemma2 group 8")
        for X in N:
            for kk in range(1, n + 1):
                for ll in range(1, n + 1):
                    for Y in N:
                        for m in range(1, n + 1):
                            if kk != m:
                                bar.add(idx(X, kk), [idx(X, ll)], [idx(Y, m)], clause="lemma2 group 9")
        comps += [c, bar]
        names += [f"P{i}", f"P{i}bar"]

    label = 1
    components = []
    for bld in comps:
        components.append(bld.emit(label, clauses))
        label += len(bld.items)
    nonterminals = {start} | {s for comp in components for p in comp for s in p.symbols() if s not in T}
    out = CDSystem(nonterminals, T, start, components, names)
    if len(components) != 2 * n + 1:
        raise ConstructionBug("lemma2 component count")
    return out


def _pcd_to_sc(sys_, clauses, warnings, chain_cap=DEFAULT_CHAIN_CAP, dedup_checks=True, single_symbol_audit=True):
    _require(sys_, ("cd",), what="thm3")
    for p in sys_.all_productions():
        if p.forb:
            raise TransformError(f"thm3 needs a permitting system; production {p.label} has a forbidding set")
        if len(p.per) > 1:
            raise TransformError(f"thm3 needs |Per| <= 1; production {p.label} has {len(p.per)}")
    V = sorted_symbols(sys_.alphabet)
    T = sys_.terminals
    c = len(sys_.components)

    def br(p):
        return SetTagged(Packed(p.rhs), [(tuple(s for c_ in p.per for s in c_), False)])

    def state(X, i, items, t):
        # chain position t: nothing primed yet (t=0) or the prefix up to item t primed
        return SetTagged(Indexed(X, i), [(items[0], False)] if t == 0 else [(items[t - 1], True)])

    b = _Builder()
    start = _primer([sys_.start], set(V))(sys_.start)
    fresh = {start}
    for i in range(1, c + 1):
        b.add(start, [Indexed(sys_.start, i)], clause="thm3 schema 1")
    for i, comp in enumerate(sys_.components, 1):
        for p in comp:
            x = p.rhs
            q = br(p)
            fresh.add(q)
            for X in V:
                b.add(p.lhs, [q], [Indexed(X, i)], clause="thm3 schema 2")
            b.add(q, x, p.per, clause="thm3 schema 3")
            if p.per:
                b.add(q, x, [Indexed(_single(p.per), i)], clause="thm3 schema 4")
            b.add(Indexed(p.lhs, i), (Indexed(x[0], i),) + x[1:], p.per, clause="thm3 schema 5")

    for i, comp in enumerate(sys_.components, 1):
        qs = sorted({br(p) for p in comp}, key=describe)
        checks = []
        seen = set()
        for p in sorted(comp, key=lambda p: p.label):
            key = (p.lhs, p.per) if dedup_checks else p.label
            if key not in seen:
                seen.add(key)
                checks.append(p)
        if len(qs) + len(checks) + 2 > chain_cap:
            raise TransformError(
                f"thm3: component {sys_.names[i - 1]} needs {len(qs) + len(checks) + 2} bookkeeping states, cap is {chain_cap}"
            )
        labels = [p.label for p in checks]
        m, r = len(qs), len(checks)
        for X in V:
            fresh.add(Indexed(X, i))
            b.add(Indexed(X, i), [state(X, i, qs, 0)], clause="thm3 schema 6")
            for t in range(1, m + 1):
                b.add(state(X, i, qs, t - 1), [state(X, i, qs, t)], (), [qs[t - 1]], "thm3 schema 7")
            b.add(state(X, i, qs, m), [state(X, i, labels, 0)], clause="thm3 schema 8")
            fresh.update(state(X, i, qs, t) for t in range(m + 1))
            fresh.update(state(X, i, labels, t) for t in range(r + 1))
        for t, p in enumerate(checks, 1):
            Aj = p.lhs
            Y = _single(p.per)
            for X in V:
                src, dst = state(X, i, labels, t - 1), state(X, i, labels, t)
                if X != Aj:
                    b.add(src, [dst], (), [Aj], "thm3 schema 9")
                if Y is not None and X != Y:
                    b.add(src, [dst], [Aj], [Y], "thm3 schema 10a")
            if Y is not None:
                b.add(state(Aj, i, labels, t - 1), [state(Aj, i, labels, t)], (), [Y], "thm3 schema 10b")
            if single_symbol_audit and Y is Aj:
                # A self-permitting production is blocked when its lhs occurs
                # exactly once; certify that by marking the single occurrence.
                mark = SetTagged(Aj, ())
                fresh.add(mark)
                for X in V:
                    if X == Aj:
                        continue
                    src, dst = state(X, i, labels, t - 1), state(X, i, labels, t)
                    m1, m2 = Staged(src, t, 1), Staged(src, t, 2)
                    fresh.update((m1, m2))
                    b.add(src, [m1], [Aj], (), "thm3 single-occurrence audit")
                    b.add(Aj, [mark], [m1], [mark], "thm3 single-occurrence audit")
                    b.add(m1, [m2], [mark], [Aj], "thm3 single-occurrence audit")
                    b.add(mark, [Aj], [m2], (), "thm3 single-occurrence audit")
                    b.add(m2, [dst], (), [mark], "thm3 single-occurrence audit")
        for X in V:
            done = state(X, i, labels, r)
            for j in range(1, c + 1):
                b.add(done, [Indexed(X, j)], clause="thm3 schema 11")
            if X in T:
                b.add(done, [X], clause="thm3 schema 12")

    _disjoint(fresh, V, "thm3")
    prods = b.emit(1, clauses)
    nonterminals = sys_.nonterminals | fresh
    return Grammar("sc", nonterminals, T, start, prods, "def2", (1, 1))


def _rc_limited_normal_form(g, clauses, warnings, **thm3_flags):
    rep = _require(g, RC_KINDS, "def1", what="limited-nf")
    if not rep.classification["production_limited"]:
        raise TransformError("limited-nf requires a production-limited random context grammar")
    g1 = _rc_normalize_forbid(g, {}, warnings)
    g2 = _rc_to_permitting_cd(g1, {}, warnings)
    thm3_clauses: dict = {}
    g3 = _pcd_to_sc(g2, thm3_clauses, warnings, **thm3_flags)
    g4 = _sc_def2_to_def1(g3, clauses, warnings, inherited=thm3_clauses)
    out = Grammar("rc", g4.nonterminals, g4.terminals, g4.start, g4.productions, "def1")
    check = validate_grammar(out)
    if not check.ok or not check.classification["limited"]:
        why = check.violations[0].message if check.violations else "limited classification failed"
        raise ConstructionBug(f"limited-nf output is not a limited random context grammar: {why}")
    for label in clauses:
        clauses[label] = "cor10 " + clauses[label]
    return out


# -- public API -----------------------------------------------------------------


def _public(fn):
    def run(g, **kw):
        return fn(g, {}, [], **kw)

    run.__name__ = fn.__name__.lstrip("_")
    run.__doc__ = fn.__doc__
    return run


sc_def2_to_rc = _public(_sc_def2_to_rc)
sc_def2_to_rc.__doc__ = """Semi-conditional (1,1) def2 grammar to an equivalent random context def1 grammar.

Terminals are replaced by fresh primed nonterminals, self-forbidding rules
are removed, the lhs is dropped from permitting sets, and a release rule
(a' -> a, no Per, For = original nonterminals) is added per terminal."""
sc_def2_to_def1 = _public(_sc_def2_to_def1)
sc_def2_to_def1.__doc__ = "Same alphabet, self-forbidding rules removed, lhs dropped from Per, mode def1."
sc_def1_to_def2 = _public(_sc_def1_to_def2)
sc_def1_to_def2.__doc__ = """Semi-conditional (1,1) def1 grammar to an equivalent def2 grammar.

The first symbol of the sentential form is kept boxed as [B]; rewriting any
other occurrence goes through a handshake between the box and a primed
copy of the rewritten nonterminal, so that the conditions are evaluated
while the rewritten occurrence is hidden."""
rc_def2_to_def1 = _public(_rc_def2_to_def1)
rc_def2_to_def1.__doc__ = "Random context def2 grammar to def1: drop self-forbidding rules and lhs from Per."
rc_def1_to_def2 = _public(_rc_def1_to_def2)
rc_def1_to_def2.__doc__ = "Random context def1 grammar to def2 by splitting each rule through a primed lhs."
rc_normalize_forbid = _public(_rc_normalize_forbid)
rc_normalize_forbid.__doc__ = """Equivalent random context grammar in which no rule forbids its own lhs.

Each rule (A -> x, Per, For) becomes (A -> A', {}, primed copies of N) and
(A' -> x, Per, For)."""
rc_to_permitting_cd = _public(_rc_to_permitting_cd)
rc_to_permitting_cd.__doc__ = """Random context grammar (lhs never forbidden) to a permitting CD system.

Produces 2n+1 components for n rules: P0 plus, per rule i, a simulation
component Pi and a re-indexing component Pibar.  All permitting sets have
at most one element and there are no forbidding sets."""
pcd_to_sc = _public(_pcd_to_sc)
pcd_to_sc.__doc__ = """Permitting CD system (|Per| <= 1) in t-mode to a semi-conditional (1,1) def2 grammar.

Keyword flags: ``chain_cap`` bounds the bookkeeping states per component,
``dedup_checks`` audits each distinct (lhs, Per) pair once, and
``single_symbol_audit`` adds the marking gadget that certifies a
self-permitting rule is blocked when its lhs occurs exactly once."""
rc_limited_normal_form = _public(_rc_limited_normal_form)
rc_limited_normal_form.__doc__ = """Production-limited random context grammar to an equivalent limited one.

Runs lemma1, lemma2, thm3 and sc-def2to1 and reads the result as a random
context grammar; raises ConstructionBug if the result is not limited."""


def signature(g) -> str:
    """Type tag used by pipeline checks: rc1, rc2, sc1, sc2 or cd."""
    if isinstance(g, CDSystem):
        return "cd"
    fam = "sc" if g.kind == "sc" else "rc"
    return fam + g.mode[-1]


# name -> (implementation, input signature, output signature)
OPS: dict = {
    "sc-to-rc": (_sc_def2_to_rc, "sc2", "rc1"),
    "sc-def2to1": (_sc_def2_to_def1, "sc2", "sc1"),
    "sc-def1to2": (_sc_def1_to_def2, "sc1", "sc2"),
    "rc-def2to1": (_rc_def2_to_def1, "rc2", "rc1"),
    "rc-def1to2": (_rc_def1_to_def2, "rc1", "rc2"),
    "lemma1": (_rc_normalize_forbid, "rc1", "rc1"),
    "lemma2": (_rc_to_permitting_cd, "rc1", "cd"),
    "thm3": (_pcd_to_sc, "cd", "sc2"),
    "limited-nf": (_rc_limited_normal_form, "rc1", "rc1"),
}


def prune_unreachable(g) -> tuple:
    """Drop productions whose lhs is unreachable from the start symbol.

    Reachability follows right-hand sides only (conditions are ignored).
    Returns (grammar, number of productions removed).
    """
    prods = g.all_productions()
    by_lhs: dict = {}
    for p in prods:
        by_lhs.setdefault(p.lhs, []).append(p)
    seen = {g.start}
    todo = [g.start]
    while todo:
        s = todo.pop()
        for p in by_lhs.get(s, ()):
            for y in p.rhs:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
    if isinstance(g, CDSystem):
        comps, names = [], []
        for name, comp in zip(g.names, g.components):
            kept = tuple(p for p in comp if p.lhs in seen)
            if kept:
                comps.append(kept)
                names.append(name)
        out = CDSystem(g.nonterminals, g.terminals, g.start, comps, names)
    else:
        out = g.replace(productions=tuple(p for p in prods if p.lhs in seen))
    return out, len(prods) - len(out.all_productions())


def apply_transform(name: str, g, prune: bool = False, **flags):
    """Run the named transform; returns (output, TransformReport)."""
    if name not in OPS:
        raise TransformError(f"unknown transform {name!r}; choose from {', '.join(OPS)}")
    fn, sig_in, _ = OPS[name]
    if signature(g) != sig_in:
        raise TransformError(f"{name} expects a {sig_in} input, got {signature(g)}")
    clauses: dict = {}
    warnings: list = []
    out = fn(g, clauses, warnings, **flags)
    report = TransformReport(name, g, out, clauses, warnings)
    if prune:
        out, removed = prune_unreachable(out)
        report.output = out
        report.pruned = removed
        kept = {p.label for p in out.all_productions()}
        report.clauses = {k: v for k, v in clauses.items() if k in kept}
        if removed:
            warnings.append(f"pruned {removed} productions with unreachable lhs")
    return out, report


def check_pipeline(names, start_sig: str) -> list:
    """Validate stage types; returns the stage list with lemma1 auto-insert slots.

    Raises TransformError on a type mismatch.
    """
    sig = start_sig
    for name in names:
        if name not in OPS:
            raise TransformError(f"unknown transform {name!r}")
        _, sig_in, sig_out = OPS[name]
        if sig != sig_in:
            raise TransformError(f"pipeline stage {name} expects {sig_in} but receives {sig}")
        sig = sig_out
    return list(names)


def run_pipeline(g, names, prune: bool = False, log: Optional[list] = None):
    """Apply transforms in order, inserting lemma1 before lemma2 when needed.

    Returns (output, list of reports).
    """
    check_pipeline(names, signature(g))
    reports = []
    cur = g
    for name in names:
        if name == "lemma2" and any((p.lhs,) in p.forb for p in cur.all_productions()):
            if log is not None:
                log.append("inserted lemma1 before lemma2 (a rule forbids its own lhs)")
            cur, rep = apply_transform("lemma1", cur, prune)
            reports.append(rep)
        cur, rep = apply_transform(name, cur, prune)
        reports.append(rep)
    return cur, reports
