"""Line-oriented grammar DSL: parsing and canonical rendering.

Example document::

    kind rc
    mode def1
    nonterminals S A B
    terminals a b
    start S
    S -> A B per A for B
    A -> a
    B -> b

Constructed symbols are written as generated names ``#k`` and resolved
through ``symtab #k = <description>`` lines, e.g. ``symtab #0 = prime(A)``.
"""

from __future__ import annotations

import re
from typing import Union

from .grammar import CDSystem, Grammar, KINDS, MODES, Production, default_mode, _cond_key
from .symbols import (
    Atom,
    Indexed,
    NAME_RE,
    Packed,
    Primed,
    SetTagged,
    Staged,
    Symbol,
    describe,
    sort_key,
)

__all__ = ["GrammarSyntaxError", "parse_grammar", "render_grammar", "load_grammar", "grammar_digest"]

RESERVED = {"per", "for", "->"}
_GEN_RE = re.compile(r"#\d+\Z")
_TOKEN_RE = re.compile(r"#\d+|->|[()]|[^\s()]+")


class GrammarSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


def _strip_comment(text: str) -> str:
    i = 0
    while True:
        j = text.find("#", i)
        if j < 0:
            return text
        if j + 1 < len(text) and text[j + 1].isdigit():
            i = j + 1
            continue
        return text[:j]


def _tokens(text: str):
    return [(m.group(), m.start() + 1) for m in _TOKEN_RE.finditer(text)]


# -- symtab descriptions ------------------------------------------------------

_DESC_TOKEN_RE = re.compile(r"\s*(#\d+|\d+|[A-Za-z][A-Za-z0-9_]*|[(),;@\[\]'])")


class _DescParser:
    def __init__(self, text: str, resolve_name, resolve_gen, lineno: int, offset: int):
        self.toks = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _DESC_TOKEN_RE.match(text, pos)
            if not m:
                raise GrammarSyntaxError(f"bad character in symbol description: {text[pos:].strip()[:20]!r}", lineno, offset + pos)
            self.toks.append((m.group(1), offset + m.start(1)))
            pos = m.end()
        self.i = 0
        self.resolve_name = resolve_name
        self.resolve_gen = resolve_gen
        self.lineno = lineno
        self.offset = offset

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, expected=None):
        if self.i >= len(self.toks):
            raise GrammarSyntaxError("unexpected end of symbol description", self.lineno, self.offset)
        tok, col = self.toks[self.i]
        if expected is not None and tok != expected:
            raise GrammarSyntaxError(f"expected {expected!r}, found {tok!r}", self.lineno, col)
        self.i += 1
        return tok

    def col(self):
        return self.toks[self.i][1] if self.i < len(self.toks) else self.offset

    def int_(self):
        col = self.col()
        tok = self.take()
        if not tok.isdigit():
            raise GrammarSyntaxError(f"expected an integer, found {tok!r}", self.lineno, col)
        return int(tok)

    def symbol(self) -> Symbol:
        col = self.col()
        tok = self.take()
        if tok.startswith("#"):
            return self.resolve_gen(tok, self.lineno, col)
        if not NAME_RE.match(tok):
            raise GrammarSyntaxError(f"expected a symbol, found {tok!r}", self.lineno, col)
        if self.peek() != "(" or tok not in ("prime", "idx", "stage", "pack", "set"):
            return self.resolve_name(tok, self.lineno, col)
        self.take("(")
        try:
            if tok == "prime":
                s = Primed(self.symbol())
            elif tok == "idx":
                base = self.symbol()
                self.take(",")
                s = Indexed(base, self.int_())
            elif tok == "stage":
                base = self.symbol()
                self.take(",")
                i = self.int_()
                self.take(",")
                s = Staged(base, i, self.int_())
            elif tok == "pack":
                content = []
                while self.peek() != ")":
                    content.append(self.symbol())
                s = Packed(content)
            else:
                base = self.symbol()
                self.take(";")
                items = []
                while self.peek() != ")":
                    items.append(self.item())
                s = SetTagged(base, items)
        except ValueError as e:
            if isinstance(e, GrammarSyntaxError):
                raise
            raise GrammarSyntaxError(str(e), self.lineno, col) from None
        self.take(")")
        return s

    def item(self):
        if self.peek() == "@":
            self.take()
            item = self.int_()
        elif self.peek() == "[":
            self.take()
            syms = []
            while self.peek() != "]":
                syms.append(self.symbol())
            self.take("]")
            item = tuple(syms)
        else:
            item = self.symbol()
        primed = False
        if self.peek() == "'":
            self.take()
            primed = True
        return (item, primed)

    def done(self):
        if self.i != len(self.toks):
            tok, col = self.toks[self.i]
            raise GrammarSyntaxError(f"trailing text in symbol description: {tok!r}", self.lineno, col)


# -- parsing ------------------------------------------------------------------


def parse_grammar(text: str) -> Union[Grammar, CDSystem]:
    """Parse a DSL document into a Grammar or CDSystem.

    Raises GrammarSyntaxError (with line/column) for syntax errors, unknown
    symbols, duplicate declarations, empty right-hand sides and conditions
    whose shape does not fit the declared kind/degree.
    """
    lines = text.splitlines()
    symtab_src: dict = {}
    body = []
    for lineno, raw in enumerate(lines, 1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.split()[0] == "symtab":
            m = re.match(r"\s*symtab\s+(#\d+)\s*=\s*(.*)$", line)
            if not m:
                raise GrammarSyntaxError("malformed symtab line, expected 'symtab #k = description'", lineno, 1)
            name = m.group(1)
            if name in symtab_src:
                raise GrammarSyntaxError(f"duplicate symtab entry {name}", lineno, m.start(1) + 1)
            if not m.group(2).strip():
                raise GrammarSyntaxError(f"empty description for {name}", lineno, m.start(2) + 1)
            symtab_src[name] = (m.group(2), lineno, m.start(2) + 1)
            continue
        body.append((lineno, line))

    # First pass over declarations so that atom classes are known before
    # symtab descriptions are resolved.
    declared_t: set = set()
    for lineno, line in body:
        toks = _tokens(line)
        if toks and toks[0][0] == "terminals" and not any(t == "->" for t, _ in toks):
            for tok, _ in toks[1:]:
                declared_t.add(tok)

    resolved: dict = {}
    resolving: set = set()

    def resolve_name(tok, lineno, col):
        return Atom(tok, terminal=tok in declared_t)

    def resolve_gen(tok, lineno, col):
        if tok in resolved:
            return resolved[tok]
        if tok not in symtab_src:
            raise GrammarSyntaxError(f"unknown generated symbol {tok}", lineno, col)
        if tok in resolving:
            raise GrammarSyntaxError(f"cyclic symtab definition for {tok}", lineno, col)
        resolving.add(tok)
        src, sl, sc = symtab_src[tok]
        p = _DescParser(src, resolve_name, resolve_gen, sl, sc)
        s = p.symbol()
        p.done()
        if isinstance(s, Atom):
            raise GrammarSyntaxError(f"{tok} must describe a constructed symbol", sl, sc)
        resolving.discard(tok)
        resolved[tok] = s
        return s

    for name in symtab_src:
        resolve_gen(name, symtab_src[name][1], symtab_src[name][2])

    kind = mode = degree = start = None
    nonterminals: list = []
    terminals: list = []
    declared: dict = {}
    components: list = []
    names: list = []
    current = None
    plain: list = []
    raw_prods = []

    def seen(key, lineno, col):
        if key in declared:
            raise GrammarSyntaxError(f"duplicate declaration of {key!r}", lineno, col)
        declared[key] = lineno

    for lineno, line in body:
        toks = _tokens(line)
        if any(t == "->" for t, _ in toks):
            if kind is None:
                raise GrammarSyntaxError("productions must follow a 'kind' line", lineno, toks[0][1])
            if kind == "cd" and current is None:
                raise GrammarSyntaxError("cd productions must appear inside a 'component' block", lineno, toks[0][1])
            raw_prods.append((lineno, toks, current if kind == "cd" else plain))
            continue
        head, col = toks[0]
        args = toks[1:]
        if head == "kind":
            seen("kind", lineno, col)
            if len(args) != 1 or args[0][0] not in KINDS + ("cd",):
                raise GrammarSyntaxError("kind must be one of rc, sc, permitting, forbidding, cd", lineno, col)
            kind = args[0][0]
        elif head == "mode":
            seen("mode", lineno, col)
            if len(args) != 1 or args[0][0] not in MODES:
                raise GrammarSyntaxError("mode must be def1 or def2", lineno, col)
            mode = args[0][0]
        elif head == "degree":
            seen("degree", lineno, col)
            if len(args) != 2 or not all(a.isdigit() for a, _ in args):
                raise GrammarSyntaxError("degree expects two non-negative integers", lineno, col)
            degree = (int(args[0][0]), int(args[1][0]))
        elif head in ("nonterminals", "terminals"):
            seen(head, lineno, col)
            for tok, c in args:
                if tok in RESERVED or tok in ("(", ")"):
                    raise GrammarSyntaxError(f"reserved word {tok!r} cannot name a symbol", lineno, c)
                if tok.startswith("#"):
                    if head == "terminals":
                        raise GrammarSyntaxError("constructed symbols cannot be terminals", lineno, c)
                    sym = resolve_gen(tok, lineno, c)
                elif NAME_RE.match(tok):
                    sym = Atom(tok, terminal=(head == "terminals"))
                else:
                    raise GrammarSyntaxError(f"invalid symbol name {tok!r}", lineno, c)
                key = ("sym", tok)
                if key in declared or (head == "nonterminals" and tok in declared_t):
                    raise GrammarSyntaxError(f"duplicate declaration of symbol {tok!r}", lineno, c)
                declared[key] = lineno
                (nonterminals if head == "nonterminals" else terminals).append(sym)
        elif head == "start":
            seen("start", lineno, col)
            if len(args) != 1:
                raise GrammarSyntaxError("start expects exactly one symbol", lineno, col)
            start = args[0]
        elif head == "component":
            if kind != "cd":
                raise GrammarSyntaxError("'component' is only valid for kind cd", lineno, col)
            if not args or not args[0][0].isdigit() or len(args) > 2:
                raise GrammarSyntaxError("expected 'component <number> [name]'", lineno, col)
            number = int(args[0][0])
            if number != len(components) + 1:
                raise GrammarSyntaxError(f"components must be numbered 1..n in order, expected {len(components) + 1}", lineno, args[0][1])
            current = []
            components.append(current)
            names.append(args[1][0] if len(args) == 2 else f"P{number}")
        else:
            raise GrammarSyntaxError(f"unknown directive {head!r}", lineno, col)

    if kind is None:
        raise GrammarSyntaxError("missing 'kind' line")
    if kind != "sc" and degree is not None:
        raise GrammarSyntaxError("'degree' is only valid for kind sc", declared["degree"], 1)
    if kind == "cd" and mode not in (None, "def1"):
        raise GrammarSyntaxError("cd systems use def1 derivation steps", declared["mode"], 1)
    if start is None:
        raise GrammarSyntaxError("missing 'start' line")

    table = {}
    for sym, tok in zip(nonterminals, _decl_tokens(body, "nonterminals")):
        table[tok] = sym
    for sym, tok in zip(terminals, _decl_tokens(body, "terminals")):
        table[tok] = sym

    def lookup(tok, lineno, col):
        if tok not in table:
            raise GrammarSyntaxError(f"unknown symbol {tok!r}", lineno, col)
        return table[tok]

    start_sym = lookup(start[0], declared["start"], start[1])
    if degree is None and kind == "sc":
        degree = (1, 1)

    label = 0
    for lineno, toks, target in raw_prods:
        label += 1
        target.append(_parse_production(label, lineno, toks, lookup, kind, degree))

    if kind == "cd":
        if not components:
            raise GrammarSyntaxError("cd system needs at least one component")
        for n, comp in zip(names, components):
            if not comp:
                raise GrammarSyntaxError(f"component {n} is empty")
        return CDSystem(frozenset(nonterminals), frozenset(terminals), start_sym, components, names)
    return Grammar(kind, frozenset(nonterminals), frozenset(terminals), start_sym, tuple(plain), mode or default_mode(kind), degree)


def _decl_tokens(body, head):
    for _, line in body:
        toks = _tokens(line)
        if toks and toks[0][0] == head and not any(t == "->" for t, _ in toks):
            return [t for t, _ in toks[1:]]
    return []


def _parse_production(label, lineno, toks, lookup, kind, degree) -> Production:
    arrow = [i for i, (t, _) in enumerate(toks) if t == "->"]
    if len(arrow) != 1 or arrow[0] != 1:
        raise GrammarSyntaxError("expected 'LHS -> rhs [per ...] [for ...]'", lineno, toks[0][1])
    lhs = lookup(toks[0][0], lineno, toks[0][1])
    if lhs.terminal:
        raise GrammarSyntaxError("left-hand side must be a nonterminal", lineno, toks[0][1])
    rest = toks[2:]
    rhs = []
    i = 0
    while i < len(rest) and rest[i][0] not in ("per", "for"):
        tok, col = rest[i]
        if tok in ("(", ")"):
            raise GrammarSyntaxError("parentheses are only allowed in conditions", lineno, col)
        rhs.append(lookup(tok, lineno, col))
        i += 1
    if not rhs:
        col = rest[0][1] if rest else toks[1][1] + 2
        raise GrammarSyntaxError("empty rhs (erasing productions are not supported)", lineno, col)
    sections = {}
    while i < len(rest):
        key, col = rest[i]
        if key in sections:
            raise GrammarSyntaxError(f"duplicate '{key}' section", lineno, col)
        i += 1
        items = []
        while i < len(rest) and rest[i][0] not in ("per", "for"):
            tok, c = rest[i]
            if tok == "(":
                j = i + 1
                syms = []
                while j < len(rest) and rest[j][0] != ")":
                    if rest[j][0] in ("(", "per", "for"):
                        raise GrammarSyntaxError("unterminated string condition", lineno, rest[j][1])
                    syms.append(lookup(rest[j][0], lineno, rest[j][1]))
                    j += 1
                if j >= len(rest):
                    raise GrammarSyntaxError("unterminated string condition", lineno, c)
                if not syms:
                    raise GrammarSyntaxError("empty condition", lineno, c)
                items.append((tuple(syms), c))
                i = j + 1
            elif tok == ")":
                raise GrammarSyntaxError("unbalanced ')'", lineno, c)
            else:
                items.append(((lookup(tok, lineno, c),), c))
                i += 1
        if not items:
            raise GrammarSyntaxError(f"'{key}' needs at least one condition", lineno, col)
        sections[key] = (items, col)
    per = sections.get("per", ([], 0))
    forb = sections.get("for", ([], 0))
    _check_condition_shape(kind, degree, per, forb, lineno)
    return Production(label, lhs, tuple(rhs), frozenset(c for c, _ in per[0]), frozenset(c for c, _ in forb[0]))


def _check_condition_shape(kind, degree, per, forb, lineno):
    if kind == "sc":
        for (items, col), limit, what in ((per, degree[0], "permitting"), (forb, degree[1], "forbidding")):
            if len(items) > 1:
                raise GrammarSyntaxError(f"sc productions allow at most one {what} condition", lineno, col)
            for c, ccol in items:
                if len(c) > limit:
                    raise GrammarSyntaxError(f"{what} condition longer than degree {limit}", lineno, ccol)
        return
    if kind == "permitting" and forb[0]:
        raise GrammarSyntaxError("permitting grammars have empty forbidding sets", lineno, forb[1])
    if kind == "forbidding" and per[0]:
        raise GrammarSyntaxError("forbidding grammars have empty permitting sets", lineno, per[1])
    for items, _ in (per, forb):
        for c, ccol in items:
            if len(c) != 1:
                raise GrammarSyntaxError("random context conditions are single nonterminals", lineno, ccol)
            if c[0].terminal:
                raise GrammarSyntaxError("random context conditions must be nonterminals", lineno, ccol)


# -- rendering ----------------------------------------------------------------


def render_grammar(g: Union[Grammar, CDSystem]) -> str:
    """Deterministic canonical text; parse_grammar(render_grammar(g)) == g."""
    nts = sorted(g.nonterminals, key=sort_key)
    ts = sorted(g.terminals, key=sort_key)
    names: dict = {}
    for s in nts:
        if not isinstance(s, Atom):
            names[s] = f"#{len(names)}"

    def name(s):
        if isinstance(s, Atom):
            return s.name
        n = names.get(s)
        if n is None:
            n = names[s] = f"#{len(names)}"
        return n

    def cond(c):
        if len(c) == 1:
            return name(c[0])
        return "( " + " ".join(name(x) for x in c) + " )"

    def prod(p):
        parts = [name(p.lhs), "->"] + [name(x) for x in p.rhs]
        if p.per:
            parts += ["per"] + [cond(c) for c in sorted(p.per, key=_cond_key)]
        if p.forb:
            parts += ["for"] + [cond(c) for c in sorted(p.forb, key=_cond_key)]
        return " ".join(parts)

    out = [f"kind {g.kind}", f"mode {g.mode}"]
    if isinstance(g, Grammar) and g.kind == "sc":
        out.append(f"degree {g.degree[0]} {g.degree[1]}")
    out.append("nonterminals " + " ".join(name(s) for s in nts))
    out.append("terminals " + " ".join(name(s) for s in ts))
    out.append(f"start {name(g.start)}")
    if isinstance(g, CDSystem):
        for i, (cname, comp) in enumerate(zip(g.names, g.components), 1):
            out.append(f"component {i} {cname}")
            out.extend(prod(p) for p in sorted(comp, key=lambda p: p.label))
    else:
        out.extend(prod(p) for p in sorted(g.productions, key=lambda p: p.label))
    # names may grow while describing nested symbols only if they were
    # undeclared; iterate over a snapshot in numbering order
    i = 0
    entries = list(names.items())
    while i < len(entries):
        sym, n = entries[i]
        out.append(f"symtab {n} = {describe(sym, names)}")
        i += 1
        if i == len(entries) and len(names) > len(entries):
            entries = list(names.items())
    return "\n".join(out) + "\n"


def load_grammar(path) -> Union[Grammar, CDSystem]:
    with open(path, encoding="utf-8") as fh:
        return parse_grammar(fh.read())


def grammar_digest(g) -> str:
    """sha256 of the canonical rendering."""
    import hashlib

    return hashlib.sha256(render_grammar(g).encode("utf-8")).hexdigest()
