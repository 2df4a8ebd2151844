"""Bounded language comparison, random grammars and pipeline fuzzing."""

from __future__ import annotations

import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from .cd import cd_membership_witness, enumerate_bounded_cd
from .derivation import ResourceLimit, enumerate_bounded, membership_witness, word_key
from .dsl import render_grammar
from .grammar import CDSystem, Grammar, Production, conds
from .symbols import Atom
from .transforms import TransformError, check_pipeline, run_pipeline, signature
from .validate import validate_grammar

__all__ = [
    "EquivVerdict",
    "GrammarShape",
    "FuzzReport",
    "bounded_equiv",
    "sample",
    "random_grammar",
    "fuzz_pipeline",
]


def sample(g, n: int, max_forms: Optional[int] = None):
    """Bounded language sample with the engine that fits ``g``."""
    if isinstance(g, CDSystem):
        return enumerate_bounded_cd(g, n, max_forms)
    return enumerate_bounded(g, n, max_forms)


def _witness(g, word, max_forms):
    if isinstance(g, CDSystem):
        return cd_membership_witness(g, word, max_forms)
    return membership_witness(g, word, max_forms)


@dataclass
class EquivVerdict:
    status: str  # equal | counterexample | inconclusive
    bound: int
    word: Optional[tuple] = None
    present_in: Optional[str] = None  # "a" or "b"
    notes: list = field(default_factory=list)
    witness_length: int = 0

    def word_text(self) -> Optional[str]:
        return None if self.word is None else " ".join(s.name for s in self.word)

    def to_dict(self):
        return {
            "status": self.status,
            "bound": self.bound,
            "word": self.word_text(),
            "present_in": self.present_in,
            "witness_steps": self.witness_length,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def bounded_equiv(a, b, n: int, max_forms: Optional[int] = None) -> EquivVerdict:
    """Compare L(a) and L(b) restricted to words of length <= n.

    A truncated sample on either side makes the verdict inconclusive.  A
    counterexample is the shortest (then lexicographically first) word in the
    symmetric difference; it is confirmed by a derivation witness on the side
    that accepts it and by a failed witness search on the other side.
    """
    sa = sample(a, n, max_forms)
    sb = sample(b, n, max_forms)
    notes = []
    for tag, s in (("a", sa), ("b", sb)):
        if s.truncated:
            notes.append(f"side {tag} hit the state cap ({s.max_forms} forms)")
    if notes:
        return EquivVerdict("inconclusive", n, notes=notes)
    wa, wb = sa.word_set(), sb.word_set()
    if wa == wb:
        return EquivVerdict("equal", n)
    word = min(wa ^ wb, key=word_key)
    side = "a" if word in wa else "b"
    acc, rej = (a, b) if side == "a" else (b, a)
    try:
        steps = _witness(acc, word, max_forms)
        other = _witness(rej, word, max_forms)
    except ResourceLimit as e:
        return EquivVerdict("inconclusive", n, notes=[f"witness search: {e}"])
    if steps is None or other is not None:
        raise AssertionError("counterexample failed re-verification; engines disagree")
    return EquivVerdict("counterexample", n, word, side, witness_length=len(steps))


# -- random grammars ------------------------------------------------------------

_N_NAMES = ("S", "A", "B", "C", "D", "E")
_T_NAMES = ("a", "b", "c", "d")


@dataclass(frozen=True)
class GrammarShape:
    kind: str = "rc"
    mode: str = ""
    degree: tuple = (1, 1)
    nonterminals: int = 3
    terminals: int = 2
    productions: int = 4
    max_rhs: int = 2
    per_density: float = 0.3
    forb_density: float = 0.3
    max_condition_set: int = 2
    production_limited: bool = False

    def check(self):
        problems = []
        if self.kind not in ("rc", "sc", "permitting", "forbidding"):
            problems.append(f"unknown kind {self.kind}")
        if not 1 <= self.nonterminals <= 6:
            problems.append("nonterminals must be in 1..6")
        if not 1 <= self.terminals <= 4:
            problems.append("terminals must be in 1..4")
        if not 1 <= self.productions <= 10:
            problems.append("productions must be in 1..10")
        if not 1 <= self.max_rhs <= 3:
            problems.append("max_rhs must be in 1..3")
        for d in (self.per_density, self.forb_density):
            if not 0.0 <= d <= 1.0:
                problems.append("densities must lie in [0, 1]")
        if self.production_limited and self.kind == "sc":
            problems.append("production-limited shapes are random context only")
        if self.production_limited and self.max_rhs < 2 and self.nonterminals < 1:
            problems.append("no production-limited shape fits")
        if self.max_condition_set < 1:
            problems.append("max_condition_set must be positive")
        if problems:
            raise ValueError("unsatisfiable grammar shape: " + "; ".join(problems))

    def to_dict(self):
        d = asdict(self)
        d["degree"] = list(self.degree)
        return d


def random_grammar(config: GrammarShape, seed: int) -> Grammar:
    """Deterministic random grammar for (config, seed); always valid."""
    config.check()
    rnd = random.Random(seed)
    N = [Atom(x) for x in _N_NAMES[: config.nonterminals]]
    T = [Atom(x, terminal=True) for x in _T_NAMES[: config.terminals]]
    V = N + T
    kind = config.kind
    prods = []
    for label in range(1, config.productions + 1):
        lhs = N[0] if label == 1 else rnd.choice(N)
        terminal_rule = False
        if config.production_limited:
            shape = rnd.choice(("BC", "B", "a"))
            if shape == "a":
                rhs = (rnd.choice(T),)
                terminal_rule = True
            else:
                rhs = tuple(rnd.choice(N) for _ in range(len(shape)))
        else:
            k = rnd.randint(1, config.max_rhs)
            rhs = tuple(rnd.choice(V) if rnd.random() < 0.6 else rnd.choice(T) for _ in range(k))
        per = forb = frozenset()
        if not terminal_rule:
            if kind == "sc":
                i, j = config.degree
                if i and rnd.random() < config.per_density:
                    per = frozenset([tuple(rnd.choice(V) for _ in range(rnd.randint(1, i)))])
                if j and rnd.random() < config.forb_density:
                    forb = frozenset([tuple(rnd.choice(V) for _ in range(rnd.randint(1, j)))])
            else:
                if kind != "forbidding" and rnd.random() < config.per_density:
                    per = conds(*rnd.sample(N, rnd.randint(1, min(config.max_condition_set, len(N)))))
                if kind != "permitting" and rnd.random() < config.forb_density:
                    forb = conds(*rnd.sample(N, rnd.randint(1, min(config.max_condition_set, len(N)))))
        prods.append(Production(label, lhs, rhs, per, forb))
    degree = tuple(config.degree) if kind == "sc" else None
    g = Grammar(kind, N, T, N[0], prods, config.mode or "", degree)
    rep = validate_grammar(g)
    if not rep.ok:  # pragma: no cover - generator bug guard
        raise AssertionError(f"random grammar invalid: {rep.violations}")
    return g


# -- fuzzing ----------------------------------------------------------------------


@dataclass
class FuzzReport:
    seed_start: int
    count: int
    config: dict
    pipeline: list
    bound: int
    cases: list
    failures: list

    def totals(self) -> dict:
        out = {"equal": 0, "counterexample": 0, "inconclusive": 0, "error": 0}
        for c in self.cases:
            out[c["status"]] += 1
        return out

    def to_dict(self):
        return {
            "seed_start": self.seed_start,
            "count": self.count,
            "config": self.config,
            "pipeline": list(self.pipeline),
            "bound": self.bound,
            "totals": self.totals(),
            "cases": self.cases,
            "failures": self.failures,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _check_case(g, pipeline, n, max_forms):
    """(verdict or None, output or None, log, error text)."""
    log: list = []
    try:
        out, _ = run_pipeline(g, pipeline, log=log)
    except TransformError as e:
        return None, None, log, str(e)
    return bounded_equiv(g, out, n, max_forms), out, log, ""


def _renumber(prods):
    return tuple(p.with_label(i) for i, p in enumerate(prods, 1))


def _shrink(g: Grammar, pipeline, n, max_forms) -> Grammar:
    """Greedy grammar-level minimization while the counterexample persists."""

    def still_fails(cand):
        if not validate_grammar(cand).ok:
            return False
        v, _, _, err = _check_case(cand, pipeline, n, max_forms)
        return v is not None and v.status == "counterexample"

    changed = True
    while changed:
        changed = False
        prods = list(g.productions)
        for i in range(len(prods)):
            if len(prods) == 1:
                break
            cand = g.replace(productions=_renumber(prods[:i] + prods[i + 1 :]))
            if still_fails(cand):
                g, changed = cand, True
                break
        if changed:
            continue
        for i, p in enumerate(g.productions):
            for which in ("per", "forb"):
                for c in sorted(getattr(p, which), key=lambda c: tuple(s.name for s in c)):
                    reduced = getattr(p, which) - {c}
                    q = Production(p.label, p.lhs, p.rhs, reduced if which == "per" else p.per, reduced if which == "forb" else p.forb)
                    cand = g.replace(productions=g.productions[:i] + (q,) + g.productions[i + 1 :])
                    if still_fails(cand):
                        g, changed = cand, True
                        break
                if changed:
                    break
            if changed:
                break
    return g


def _fuzz_one(args):
    config, seed, pipeline, n, max_forms = args
    g = random_grammar(config, seed)
    verdict, out, log, err = _check_case(g, pipeline, n, max_forms)
    case = {"seed": seed, "inserted": log}
    if verdict is None:
        case.update(status="error", error=err)
        return case, None
    case.update(verdict.to_dict())
    if isinstance(out, Grammar):
        case["output_limited"] = validate_grammar(out).classification["limited"]
    failure = None
    if verdict.status == "counterexample":
        small = _shrink(g, pipeline, n, max_forms)
        v2, _, _, _ = _check_case(small, pipeline, n, max_forms)
        failure = {
            "seed": seed,
            "word": v2.word_text(),
            "present_in": v2.present_in,
            "grammar": render_grammar(small),
            "productions": len(small.productions),
            "rhs_total": sum(len(p.rhs) for p in small.productions),
        }
    return case, failure


def fuzz_pipeline(
    config: GrammarShape,
    pipeline: Sequence[str],
    count: int,
    n: int,
    seed: int = 0,
    max_forms: Optional[int] = None,
    workers: int = 1,
) -> FuzzReport:
    """Generate ``count`` grammars from consecutive seeds and check the pipeline on each."""
    config.check()
    pipeline = list(pipeline)
    probe = random_grammar(config, seed)
    check_pipeline(pipeline, signature(probe))
    jobs = [(config, s, pipeline, n, max_forms) for s in range(seed, seed + count)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_fuzz_one, jobs))
    else:
        results = [_fuzz_one(j) for j in jobs]
    results.sort(key=lambda r: r[0]["seed"])
    cases = [c for c, _ in results]
    failures = sorted((f for _, f in results if f), key=lambda f: (f["productions"], f["rhs_total"], f["seed"]))
    return FuzzReport(seed, count, config.to_dict(), pipeline, n, cases, failures)
