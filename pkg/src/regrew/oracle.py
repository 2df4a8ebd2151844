"""Reference enumerator used to cross-check the main engine.

Iterative deepening over derivation depth: each round runs a depth-limited
search from the start symbol that tests every production at every position
with the plain ``applicable`` predicate.  Rounds stop once a deeper round
reaches no new sentential form.  It shares no code with the compiled
successor tables of the main engine.
"""

from __future__ import annotations

from typing import Optional

from .derivation import ResourceLimit, applicable, max_forms_setting, word_key

__all__ = ["oracle_words"]


def _expand(prods, mode, form):
    out = []
    for pos, a in enumerate(form):
        for p in prods:
            if p.lhs == a and applicable(p, form, pos, mode):
                out.append(form[:pos] + p.rhs + form[pos + 1 :])
    return out


def oracle_words(g, n: int, max_forms: Optional[int] = None) -> tuple:
    """Sorted terminal words of length <= n; raises ResourceLimit if capped."""
    cap = max_forms_setting(max_forms)
    prods = list(g.all_productions())
    mode = g.mode
    start = (g.start,)
    known = 0
    depth = 0
    while True:
        # shallowest depth at which each form has been reached this round
        best = {start: 0}
        stack = [(start, 0)]
        while stack:
            form, d = stack.pop()
            if d == depth or best.get(form, d) < d:
                continue
            for nxt in _expand(prods, mode, form):
                if len(nxt) > n:
                    continue
                if best.get(nxt, depth + 1) <= d + 1:
                    continue
                best[nxt] = d + 1
                if len(best) > cap:
                    raise ResourceLimit(f"oracle state cap {cap} reached")
                stack.append((nxt, d + 1))
        if len(best) == known:
            words = [f for f in best if all(s.terminal for s in f)]
            return tuple(sorted(words, key=word_key))
        known = len(best)
        depth += 1
