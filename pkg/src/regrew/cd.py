"""t-mode derivations of cooperating distributed grammar systems.

A t-step by component k rewrites with k's productions (def1 relation) at
least once and stops only when none of them applies any more.  Inner
closures are searched over forms no longer than the bound, with a visited
set, so self-looping productions cannot make a search diverge: a form that
can only loop never becomes k-terminal and contributes nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .derivation import (
    CompiledRules,
    ContractError,
    LanguageSample,
    ResourceLimit,
    form_text,
    max_forms_setting,
    word_key,
)
from .grammar import CDSystem

__all__ = [
    "TModeStep",
    "t_step_successors",
    "enumerate_bounded_cd",
    "cd_membership_witness",
    "CDEngine",
]


@dataclass(frozen=True)
class TModeStep:
    component: int  # 1-based position in the component list
    name: str
    source: tuple
    steps: int
    result: tuple

    def to_dict(self):
        return {
            "component": self.component,
            "name": self.name,
            "inner_steps": self.steps,
            "source": form_text(self.source),
            "result": form_text(self.result),
        }


class _Budget:
    __slots__ = ("cap", "used")

    def __init__(self, cap):
        self.cap = cap
        self.used = 0

    def spend(self, k=1):
        self.used += k
        if self.used > self.cap:
            raise ResourceLimit(f"state cap {self.cap} reached")


class CDEngine:
    """Compiled components plus t-step search."""

    def __init__(self, system: CDSystem):
        if not system.components:
            raise ContractError("cd system has no components")
        self.system = system
        self.rules = [CompiledRules(c, "def1") for c in system.components]
        self.memo: dict = {}

    def targets(self, k: int, form: tuple, bound: int, budget: Optional[_Budget] = None) -> list:
        """k-terminal forms reachable from ``form`` in >= 1 steps (0-based ``k``).

        Same set as ``t_step`` but memoized across calls: strongly connected
        components of the bounded component-k graph are resolved once and
        share their set of reachable k-terminal forms.
        """
        rules = self.rules[k]
        if rules.lhs_set.isdisjoint(form):
            return []
        acc = set()
        for s in rules.successor_forms(form):
            if len(s) <= bound:
                acc |= self._reach(k, s, bound, budget)
        return sorted(acc, key=word_key)

    def _reach(self, k, root, bound, budget):
        memo = self.memo.setdefault((k, bound), {})
        hit = memo.get(root)
        if hit is not None:
            return hit
        rules = self.rules[k]
        index: dict = {}
        low: dict = {}
        succs: dict = {}
        terminal: dict = {}
        stack: list = []
        on: set = set()
        work: list = []

        def push(v):
            index[v] = low[v] = len(index)
            stack.append(v)
            on.add(v)
            if budget is not None:
                budget.spend()
            nxt = rules.successor_forms(v)
            terminal[v] = not nxt
            succs[v] = [x for x in nxt if len(x) <= bound]
            work.append((v, iter(succs[v])))

        push(root)
        while work:
            v, it = work[-1]
            descended = False
            for w in it:
                if w in memo:
                    continue
                if w not in index:
                    push(w)
                    descended = True
                    break
                if w in on and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                members = set(comp)
                found = set()
                for w in comp:
                    if terminal[w]:
                        found.add(w)
                    for x in succs[w]:
                        if x not in members:
                            found |= memo[x]
                    del succs[w]
                frozen = frozenset(found)
                for w in comp:
                    memo[w] = frozen
        return memo[root]

    def t_step(self, k: int, form: tuple, bound: int, budget: Optional[_Budget] = None) -> dict:
        """Map each k-terminal form reachable in >= 1 steps to its minimal step count.

        ``k`` is 0-based here.  Returned keys are in discovery order.
        """
        rules = self.rules[k]
        if rules.lhs_set.isdisjoint(form):
            return {}
        depth = {form: 0}
        frontier = [form]
        result: dict = {}
        d = 0
        while frontier:
            d += 1
            nxt = []
            for f in frontier:
                for s in rules.successor_forms(f):
                    if len(s) > bound or s in depth:
                        continue
                    depth[s] = d
                    if budget is not None:
                        budget.spend()
                    if rules.lhs_set.isdisjoint(s) or not rules.any_applicable(s):
                        result[s] = d
                    else:
                        nxt.append(s)
            frontier = nxt
        # the source itself can be revisited through a cycle; it is never
        # k-terminal because it had a successor, so it is not in result
        return result


def t_step_successors(system: CDSystem, k: int, form: Sequence, bound: int, max_forms: Optional[int] = None) -> list:
    """k-terminal forms reachable from ``form`` by component ``k`` (1-based).

    Sorted canonically.  Raises ResourceLimit when the cap is hit.
    """
    form = tuple(form)
    if not 1 <= k <= len(system.components):
        raise ContractError(f"component index {k} out of range")
    if len(form) > bound:
        raise ContractError("form longer than the bound")
    eng = CDEngine(system)
    res = eng.t_step(k - 1, form, bound, _Budget(max_forms_setting(max_forms)))
    return sorted(res, key=word_key)


def enumerate_bounded_cd(
    system: CDSystem,
    n: int,
    max_forms: Optional[int] = None,
    trace: Optional[list] = None,
) -> LanguageSample:
    """Terminal words of length <= n generated in t-mode.

    Every inner and outer state counts against the cap; hitting it returns
    a truncated sample.  If ``trace`` is a list, one TModeStep per explored
    t-step transition is appended to it.
    """
    if n < 1:
        raise ContractError("bound must be positive")
    cap = max_forms_setting(max_forms)
    eng = CDEngine(system)
    budget = _Budget(cap)
    start = (system.start,)
    visited = {start}
    frontier = [start]
    words = set()
    truncated = False
    try:
        while frontier:
            nxt = []
            for form in frontier:
                for k in range(len(eng.rules)):
                    if trace is not None:
                        found = eng.t_step(k, form, n, budget)
                        for s, steps in found.items():
                            trace.append(TModeStep(k + 1, system.names[k], form, steps, s))
                    else:
                        found = eng.targets(k, form, n, budget)
                    for s in found:
                        if s in visited:
                            continue
                        visited.add(s)
                        budget.spend()
                        if all(x.terminal for x in s):
                            words.add(s)
                        else:
                            nxt.append(s)
            frontier = nxt
    except ResourceLimit:
        truncated = True
    return LanguageSample(n, tuple(sorted(words, key=word_key)), truncated, budget.used, cap)


def cd_membership_witness(system: CDSystem, word: Sequence, max_forms: Optional[int] = None):
    """List of TModeStep deriving ``word`` from the start symbol, or None."""
    word = tuple(word)
    if not word:
        raise ContractError("word must be nonempty")
    n = len(word)
    eng = CDEngine(system)
    budget = _Budget(max_forms_setting(max_forms))
    start = (system.start,)
    parent = {start: None}
    frontier = [start]
    while frontier:
        nxt = []
        for form in frontier:
            for k in range(len(eng.rules)):
                for s, steps in eng.t_step(k, form, n, budget).items():
                    if s in parent:
                        continue
                    parent[s] = TModeStep(k + 1, system.names[k], form, steps, s)
                    if s == word:
                        chain = []
                        cur = s
                        while parent[cur] is not None:
                            chain.append(parent[cur])
                            cur = parent[cur].source
                        return chain[::-1]
                    if not all(x.terminal for x in s):
                        nxt.append(s)
        frontier = nxt
    return None


def trace_document(trace: list) -> str:
    """Canonical JSON lines for a t-step trace, using short form digests."""
    import hashlib

    def dig(form):
        return hashlib.sha256(form_text(form).encode()).hexdigest()[:16]

    lines = [
        json.dumps(
            {"component": t.name, "inner_steps": t.steps, "source": dig(t.source), "result": dig(t.result)},
            sort_keys=True,
        )
        for t in trace
    ]
    return "\n".join(lines) + ("\n" if lines else "")
