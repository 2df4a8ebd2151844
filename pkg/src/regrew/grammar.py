"""Productions, grammars and CD grammar systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

from .symbols import Symbol, sort_key

__all__ = [
    "Condition",
    "Production",
    "Grammar",
    "CDSystem",
    "KINDS",
    "MODES",
    "default_mode",
    "conds",
]

KINDS = ("rc", "sc", "permitting", "forbidding")
MODES = ("def1", "def2")

# A condition is a nonempty tuple of symbols; length-1 conditions are the
# random-context / degree-(1,1) case.
Condition = tuple

_EMPTY: frozenset = frozenset()
_SINGLETONS: dict = {}


def conds(*symbols: Symbol) -> frozenset:
    """Condition set made of length-1 conditions, one per symbol (interned for singletons)."""
    if not symbols:
        return _EMPTY
    if len(symbols) == 1:
        s = symbols[0]
        c = _SINGLETONS.get(s)
        if c is None:
            c = _SINGLETONS[s] = frozenset(((s,),))
        return c
    return frozenset((s,) for s in symbols)


def default_mode(kind: str) -> str:
    return "def2" if kind == "sc" else "def1"


@dataclass(frozen=True, slots=True)
class Production:
    label: int
    lhs: Symbol
    rhs: tuple
    per: frozenset = _EMPTY
    forb: frozenset = _EMPTY

    def __post_init__(self):
        if not isinstance(self.rhs, tuple):
            object.__setattr__(self, "rhs", tuple(self.rhs))
        for name in ("per", "forb"):
            v = getattr(self, name)
            if not isinstance(v, frozenset):
                object.__setattr__(self, name, frozenset(tuple(c) for c in v))

    def symbols(self) -> Iterator[Symbol]:
        yield self.lhs
        yield from self.rhs
        for c in self.per:
            yield from c
        for c in self.forb:
            yield from c

    @property
    def context_free(self) -> bool:
        return not self.per and not self.forb

    def with_label(self, label: int) -> "Production":
        return Production(label, self.lhs, self.rhs, self.per, self.forb)

    def __repr__(self):
        from .symbols import describe

        def cs(cs_):
            return "{" + ",".join(" ".join(describe(x) for x in c) for c in sorted(cs_, key=_cond_key)) + "}"

        rhs = " ".join(describe(x) for x in self.rhs)
        return f"{self.label}.({describe(self.lhs)} -> {rhs}, {cs(self.per)}, {cs(self.forb)})"


def _cond_key(c):
    return tuple(sort_key(s) for s in c)


@dataclass(frozen=True)
class Grammar:
    """G = (N, T, P, S) together with the grammar family and derivation mode."""

    kind: str
    nonterminals: frozenset
    terminals: frozenset
    start: Symbol
    productions: tuple
    mode: str = ""
    degree: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown grammar kind {self.kind!r}")
        if not self.mode:
            object.__setattr__(self, "mode", default_mode(self.kind))
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.kind == "sc" and self.degree is None:
            object.__setattr__(self, "degree", (1, 1))
        if self.kind != "sc" and self.degree is not None:
            raise ValueError("degree only applies to sc grammars")
        object.__setattr__(self, "nonterminals", frozenset(self.nonterminals))
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        object.__setattr__(self, "productions", tuple(self.productions))

    @property
    def alphabet(self) -> frozenset:
        return self.nonterminals | self.terminals

    def all_productions(self) -> tuple:
        return self.productions

    def replace(self, **changes) -> "Grammar":
        fields_ = dict(
            kind=self.kind,
            nonterminals=self.nonterminals,
            terminals=self.terminals,
            start=self.start,
            productions=self.productions,
            mode=self.mode,
            degree=self.degree,
        )
        fields_.update(changes)
        if fields_["kind"] != "sc":
            fields_["degree"] = None
        return Grammar(**fields_)


@dataclass(frozen=True)
class CDSystem:
    """Cooperating distributed grammar system working in t-mode (def-1 steps)."""

    nonterminals: frozenset
    terminals: frozenset
    start: Symbol
    components: tuple
    names: tuple = field(default=())

    kind = "cd"
    mode = "def1"

    def __post_init__(self):
        object.__setattr__(self, "nonterminals", frozenset(self.nonterminals))
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        object.__setattr__(self, "components", tuple(tuple(c) for c in self.components))
        names = tuple(self.names) if self.names else tuple(f"P{i}" for i in range(1, len(self.components) + 1))
        if len(names) != len(self.components):
            raise ValueError("one name per component")
        object.__setattr__(self, "names", names)

    @property
    def alphabet(self) -> frozenset:
        return self.nonterminals | self.terminals

    def all_productions(self) -> tuple:
        return tuple(p for comp in self.components for p in comp)

    @property
    def is_permitting(self) -> bool:
        return all(not p.forb for p in self.all_productions())


GrammarLike = Union[Grammar, CDSystem]


def sorted_symbols(symbols: Iterable[Symbol]) -> list:
    return sorted(symbols, key=sort_key)
