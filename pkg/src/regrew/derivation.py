"""Direct derivation steps, successor generation and bounded enumeration.

Sentential forms are tuples of symbols.  Two step relations are supported:
``def1`` checks conditions against the form with the rewritten occurrence
removed, ``def2`` against the whole form.  Conditions longer than one symbol
are matched as contiguous substrings.
"""

from __future__ import annotations

import json
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .grammar import Grammar, Production
from .symbols import Symbol, describe

__all__ = [
    "DEFAULT_MAX_FORMS",
    "ContractError",
    "ResourceLimit",
    "DerivationStep",
    "LanguageSample",
    "applicable",
    "successors",
    "enumerate_bounded",
    "membership_witness",
    "replay",
    "max_forms_setting",
    "form_text",
    "word_key",
    "CompiledRules",
]

DEFAULT_MAX_FORMS = 1_000_000


class ContractError(ValueError):
    """A caller broke an operation's precondition."""


class ResourceLimit(RuntimeError):
    """The state cap was hit before a search could finish (inconclusive)."""


def max_forms_setting(override: Optional[int] = None) -> int:
    if override is not None:
        return int(override)
    env = os.environ.get("REGREW_MAX_FORMS")
    if env:
        try:
            value = int(float(env))
        except ValueError:
            raise ContractError(f"REGREW_MAX_FORMS must be an integer, got {env!r}") from None
        if value < 1:
            raise ContractError("REGREW_MAX_FORMS must be positive")
        return value
    return DEFAULT_MAX_FORMS


def form_text(form: Sequence[Symbol]) -> str:
    return " ".join(describe(s) for s in form)


def word_key(word: Sequence[Symbol]):
    return (len(word), tuple(describe(s) for s in word))


# -- single steps -------------------------------------------------------------


def _occurs(cond: tuple, ctx: Sequence[Symbol]) -> bool:
    k = len(cond)
    if k == 1:
        return cond[0] in ctx
    return any(tuple(ctx[i : i + k]) == cond for i in range(len(ctx) - k + 1))


def applicable(p: Production, form: Sequence[Symbol], pos: int, mode: str) -> bool:
    """Whether ``p`` may rewrite the occurrence at ``pos`` of ``form``."""
    if not 0 <= pos < len(form):
        raise ContractError(f"position {pos} outside a form of length {len(form)}")
    if form[pos] != p.lhs:
        raise ContractError(f"symbol at position {pos} is {describe(form[pos])}, not {describe(p.lhs)}")
    if mode == "def1":
        ctx = tuple(form[:pos]) + tuple(form[pos + 1 :])
    elif mode == "def2":
        ctx = tuple(form)
    else:
        raise ContractError(f"unknown mode {mode!r}")
    return all(_occurs(c, ctx) for c in p.per) and not any(_occurs(c, ctx) for c in p.forb)


@dataclass(frozen=True)
class DerivationStep:
    label: int
    position: int
    result: tuple

    def to_dict(self):
        return {"label": self.label, "position": self.position, "result": form_text(self.result)}


def successors(g, form: Sequence[Symbol], mode: Optional[str] = None, productions=None) -> list:
    """All applicable steps ordered by (position, label)."""
    mode = mode or g.mode
    form = tuple(form)
    by_lhs: dict = {}
    for p in productions if productions is not None else g.all_productions():
        by_lhs.setdefault(p.lhs, []).append(p)
    steps = []
    for pos, s in enumerate(form):
        for p in sorted(by_lhs.get(s, ()), key=lambda p: p.label):
            if applicable(p, form, pos, mode):
                steps.append(DerivationStep(p.label, pos, form[:pos] + p.rhs + form[pos + 1 :]))
    return steps


# -- compiled successor function ----------------------------------------------


class _LhsRules:
    """Rules sharing one lhs, grouped by rhs; only 'does any apply' matters.

    Groups whose rules are context-free are always live; groups made of
    rules with a single one-symbol permitting condition and nothing else are
    indexed by that symbol; everything else is checked one rule at a time.
    """

    __slots__ = ("rhs", "free", "by_per", "general")

    def __init__(self):
        self.rhs: list = []
        self.free: list = []
        self.by_per: dict = {}
        self.general: list = []


class CompiledRules:
    """Fast successor-form generator for a production set under one mode."""

    def __init__(self, productions, mode: str):
        if mode not in ("def1", "def2"):
            raise ContractError(f"unknown mode {mode!r}")
        self.def1 = mode == "def1"
        table: dict = {}
        slots: dict = {}
        for p in productions:
            rules = table.get(p.lhs)
            if rules is None:
                rules = table[p.lhs] = _LhsRules()
            key = (p.lhs, p.rhs)
            gi = slots.get(key)
            if gi is None:
                gi = slots[key] = len(rules.rhs)
                rules.rhs.append(p.rhs)
            if p.context_free:
                rules.free.append(gi)
            elif not p.forb and len(p.per) == 1 and len(next(iter(p.per))) == 1:
                rules.by_per.setdefault(next(iter(p.per))[0], []).append(gi)
            else:
                per1 = frozenset(c[0] for c in p.per if len(c) == 1)
                forb1 = frozenset(c[0] for c in p.forb if len(c) == 1)
                perl = tuple(c for c in p.per if len(c) > 1)
                forbl = tuple(c for c in p.forb if len(c) > 1)
                rules.general.append((gi, per1, forb1, perl, forbl))
        self.table = table
        self.lhs_set = frozenset(table)

    def any_applicable(self, form: tuple) -> bool:
        return any(True for _ in self._iter(form, stop_first=True))

    def successor_forms(self, form: tuple) -> list:
        """Distinct successor forms in deterministic (position, rule) order."""
        seen = set()
        out = []
        for nxt in self._iter(form):
            if nxt not in seen:
                seen.add(nxt)
                out.append(nxt)
        return out

    def _live(self, rules: _LhsRules, form, pos, a, alph, single) -> list:
        live = set(rules.free)
        for s in alph:
            idxs = rules.by_per.get(s)
            if idxs and not (single and s is a):
                live.update(idxs)
        if rules.general:
            ctx_alph = alph - {a} if single else alph
            ctx = None
            for gi, per1, forb1, perl, forbl in rules.general:
                if gi in live or not per1 <= ctx_alph or not forb1.isdisjoint(ctx_alph):
                    continue
                if perl or forbl:
                    if ctx is None:
                        ctx = form[:pos] + form[pos + 1 :] if self.def1 else form
                    if not all(_occurs(c, ctx) for c in perl) or any(_occurs(c, ctx) for c in forbl):
                        continue
                live.add(gi)
        return sorted(live)

    def _iter(self, form: tuple, stop_first: bool = False):
        table = self.table
        alph = None
        cnt = None
        memo: dict = {}
        for pos, a in enumerate(form):
            rules = table.get(a)
            if rules is None:
                continue
            if alph is None:
                alph = set(form)
                cnt = Counter(form)
            single = self.def1 and cnt[a] == 1
            # with no long conditions the live set depends only on the symbol
            live = memo.get(a)
            if live is None:
                live = self._live(rules, form, pos, a, alph, single)
                if not any(perl or forbl for _, _, _, perl, forbl in rules.general):
                    memo[a] = live
            for gi in live:
                if stop_first:
                    yield None
                    return
                yield form[:pos] + rules.rhs[gi] + form[pos + 1 :]


# -- bounded enumeration ------------------------------------------------------


@dataclass
class LanguageSample:
    bound: int
    words: tuple
    truncated: bool
    states_explored: int
    max_forms: int = DEFAULT_MAX_FORMS
    digest: str = ""
    notes: list = field(default_factory=list)

    def word_set(self) -> frozenset:
        return frozenset(self.words)

    def word_strings(self) -> list:
        return [" ".join(s.name for s in w) for w in self.words]

    def to_dict(self):
        return {
            "grammar": self.digest,
            "bound": self.bound,
            "truncated": self.truncated,
            "states_explored": self.states_explored,
            "max_forms": self.max_forms,
            "words": self.word_strings(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


_WORKER_RULES = None


def _worker_init(productions, mode):
    global _WORKER_RULES
    _WORKER_RULES = CompiledRules(productions, mode)


def _worker_expand(chunk):
    return [_WORKER_RULES.successor_forms(f) for f in chunk]


def _is_word(form) -> bool:
    return all(s.terminal for s in form)


def enumerate_bounded(g: Grammar, n: int, max_forms: Optional[int] = None, workers: int = 1) -> LanguageSample:
    """All terminal words of length at most ``n`` derivable from the start symbol.

    Breadth-first closure with a visited set; forms longer than ``n`` are
    dropped, which is sound because every production is nonerasing.  When the
    number of visited forms reaches the cap the sample is marked truncated.
    With ``workers > 1`` each generation's frontier is expanded in worker
    processes; merges happen in frontier order, so the result is identical.
    """
    if n < 1:
        raise ContractError("bound must be positive")
    cap = max_forms_setting(max_forms)
    rules = CompiledRules(g.all_productions(), g.mode)
    start = (g.start,)
    visited = {start}
    frontier = [start]
    words = set()
    truncated = False
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(max_workers=workers, initializer=_worker_init, initargs=(tuple(g.all_productions()), g.mode))
    try:
        while frontier and not truncated:
            if pool is not None and len(frontier) >= 2 * workers:
                size = -(-len(frontier) // workers)
                chunks = [frontier[i : i + size] for i in range(0, len(frontier), size)]
                expanded = [r for part in pool.map(_worker_expand, chunks) for r in part]
            else:
                expanded = [rules.successor_forms(f) for f in frontier]
            nxt = []
            for form, succ in zip(frontier, expanded):
                for s in succ:
                    if len(s) > n or s in visited:
                        continue
                    if len(visited) >= cap:
                        truncated = True
                        break
                    visited.add(s)
                    if _is_word(s):
                        words.add(s)
                    else:
                        nxt.append(s)
                if truncated:
                    break
            frontier = nxt
    finally:
        if pool is not None:
            pool.shutdown()
    return LanguageSample(n, tuple(sorted(words, key=word_key)), truncated, len(visited), cap)


def membership_witness(g: Grammar, word: Sequence[Symbol], max_forms: Optional[int] = None):
    """A derivation of ``word`` as a list of steps, or None if there is none.

    Raises ResourceLimit when the search is cut off before it can decide.
    """
    word = tuple(word)
    if not word:
        raise ContractError("word must be nonempty")
    for s in word:
        if s not in g.terminals:
            raise ContractError(f"{describe(s)} is not a terminal of the grammar")
    cap = max_forms_setting(max_forms)
    rules = CompiledRules(g.all_productions(), g.mode)
    n = len(word)
    start = (g.start,)
    parent = {start: None}
    frontier = [start]
    found = False
    while frontier and not found:
        nxt = []
        for form in frontier:
            for s in rules.successor_forms(form):
                if len(s) > n or s in parent:
                    continue
                if len(parent) >= cap:
                    raise ResourceLimit(f"state cap {cap} reached while searching for a witness")
                parent[s] = form
                if s == word:
                    found = True
                    break
                if not _is_word(s):
                    nxt.append(s)
            if found:
                break
        frontier = nxt
    if not found:
        return None
    chain = [word]
    while parent[chain[-1]] is not None:
        chain.append(parent[chain[-1]])
    chain.reverse()
    steps = []
    for src, dst in zip(chain, chain[1:]):
        step = next(s for s in successors(g, src) if s.result == dst)
        steps.append(step)
    return steps


def replay(g: Grammar, steps) -> tuple:
    """Re-run a witness through ``successors``; returns the final form."""
    form = (g.start,)
    for st in steps:
        match = [s for s in successors(g, form) if s.label == st.label and s.position == st.position]
        if not match or match[0].result != st.result:
            raise ContractError(f"step {st} is not a valid derivation step from {form_text(form)}")
        form = st.result
    return form

