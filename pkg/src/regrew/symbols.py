"""Structural grammar symbols.

Every symbol is an immutable term.  User atoms carry a name and a class
(terminal or nonterminal); every other constructor builds a nonterminal out
of existing symbols, so freshly constructed alphabets never need a global
name counter.  Instances are hash-consed: constructing the same term twice
returns the same object, which keeps equality checks and dict lookups cheap
on the large alphabets produced by the transforms.
"""

from __future__ import annotations

import re
from typing import Iterable, Union

__all__ = [
    "Symbol",
    "Atom",
    "Primed",
    "Indexed",
    "Staged",
    "Packed",
    "SetTagged",
    "Item",
    "NAME_RE",
    "describe",
    "sort_key",
    "is_constructed",
]

NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

_INTERN: dict = {}


class Symbol:
    """Base class of all symbol terms.

    Interning makes structural equality coincide with identity, so the
    default identity ``__eq__``/``__hash__`` (implemented in C) are exact and
    keep hashing of sentential forms cheap.
    """

    __slots__ = ("_desc", "__weakref__")

    terminal = False

    def __setattr__(self, name, value):
        raise AttributeError("symbols are immutable")

    def __repr__(self):
        return f"<{describe(self)}>"

    def __lt__(self, other):
        return sort_key(self) < sort_key(other)

    def _fields(self) -> tuple:
        raise NotImplementedError

    def __reduce__(self):
        return (type(self), self._fields())


def _make(cls, fields: tuple):
    key = (cls.__name__,) + fields
    obj = _INTERN.get(key)
    if obj is None:
        obj = object.__new__(cls)
        names = cls.__slots__
        for name, value in zip(names, fields):
            object.__setattr__(obj, name, value)
        object.__setattr__(obj, "_desc", None)
        _INTERN[key] = obj
    return obj


class Atom(Symbol):
    __slots__ = ("name", "terminal")

    def __new__(cls, name: str, terminal: bool = False):
        if not isinstance(name, str) or not NAME_RE.match(name):
            raise ValueError(f"invalid atom name {name!r}")
        return _make(cls, (name, bool(terminal)))

    def _fields(self):
        return (self.name, self.terminal)


class Primed(Symbol):
    __slots__ = ("base",)

    def __new__(cls, base: Symbol):
        _check(base)
        return _make(cls, (base,))

    def _fields(self):
        return (self.base,)


class Indexed(Symbol):
    __slots__ = ("base", "index")

    def __new__(cls, base: Symbol, index: int):
        _check(base)
        _positive(index)
        return _make(cls, (base, index))

    def _fields(self):
        return (self.base, self.index)


class Staged(Symbol):
    __slots__ = ("base", "index", "stage")

    def __new__(cls, base: Symbol, index: int, stage: int):
        _check(base)
        _positive(index)
        _positive(stage)
        return _make(cls, (base, index, stage))

    def _fields(self):
        return (self.base, self.index, self.stage)


class Packed(Symbol):
    __slots__ = ("content",)

    def __new__(cls, content: Iterable[Symbol]):
        content = tuple(content)
        if not content:
            raise ValueError("packed symbol needs nonempty content")
        for s in content:
            _check(s)
        return _make(cls, (content,))

    def _fields(self):
        return (self.content,)


# A tag item is a symbol, a production label, or a condition record
# (tuple of symbols, possibly empty).
Item = Union[Symbol, int, tuple]


class SetTagged(Symbol):
    __slots__ = ("base", "tag")

    def __new__(cls, base: Symbol, tag: Iterable[tuple[Item, bool]]):
        _check(base)
        tag = frozenset((item, bool(primed)) for item, primed in tag)
        for item, _ in tag:
            _check_item(item)
        return _make(cls, (base, tag))

    def _fields(self):
        return (self.base, self.tag)


def _check(s):
    if not isinstance(s, Symbol):
        raise TypeError(f"expected a Symbol, got {type(s).__name__}")


def _positive(i):
    if not isinstance(i, int) or isinstance(i, bool) or i < 1:
        raise ValueError(f"index must be a positive integer, got {i!r}")


def _check_item(item):
    if isinstance(item, Symbol):
        return
    if isinstance(item, int) and not isinstance(item, bool):
        _positive(item)
        return
    if isinstance(item, tuple):
        for s in item:
            _check(s)
        return
    raise TypeError(f"invalid tag item {item!r}")


def is_constructed(s: Symbol) -> bool:
    return not isinstance(s, Atom)


def describe(s: Symbol, names: dict | None = None) -> str:
    """Structural description, e.g. ``idx(prime(A),2)``.

    ``names`` maps symbols to short names that are emitted instead of the
    full description for nested occurrences (the DSL symtab uses this).
    """
    if names is None:
        d = s._desc
        if d is None:
            d = _describe(s, None, top=True)
            if len(d) <= 4096:  # huge set-tagged descriptions are not worth keeping
                object.__setattr__(s, "_desc", d)
        return d
    return _describe(s, names, top=True)


def _describe(s, names, top=False):
    if not top and names is not None and s in names:
        return names[s]
    if isinstance(s, Atom):
        return s.name
    if names is None and not top:
        return describe(s)
    sub = lambda x: _describe(x, names)  # noqa: E731
    if isinstance(s, Primed):
        return f"prime({sub(s.base)})"
    if isinstance(s, Indexed):
        return f"idx({sub(s.base)},{s.index})"
    if isinstance(s, Staged):
        return f"stage({sub(s.base)},{s.index},{s.stage})"
    if isinstance(s, Packed):
        return "pack(" + " ".join(sub(x) for x in s.content) + ")"
    if isinstance(s, SetTagged):
        items = sorted(_describe_item(item, names) + ("'" if primed else "") for item, primed in s.tag)
        return f"set({sub(s.base)};" + " ".join(items) + ")"
    raise TypeError(type(s))


def _describe_item(item, names):
    if isinstance(item, Symbol):
        return _describe(item, names)
    if isinstance(item, int):
        return f"@{item}"
    return "[" + " ".join(_describe(x, names) for x in item) + "]"


def sort_key(s: Symbol) -> tuple:
    """Total canonical order: atoms before constructed symbols, then by description."""
    return (0 if isinstance(s, Atom) else 1, describe(s))
