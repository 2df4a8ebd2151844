import pytest
from conftest import CORPUS, corpus, nt, t

from regrew import (
    Atom,
    CDSystem,
    Grammar,
    GrammarSyntaxError,
    Indexed,
    Packed,
    Primed,
    Production,
    SetTagged,
    Staged,
    conds,
    grammar_digest,
    parse_grammar,
    render_grammar,
    rc_to_permitting_cd,
)
from regrew.symbols import describe, sort_key

# -- symbols -------------------------------------------------------------------


def test_structural_symbols_are_interned():
    a = Atom("A")
    assert Primed(Atom("A")) is Primed(a)
    assert Indexed(a, 2) == Indexed(Atom("A"), 2)
    assert Indexed(a, 2) != Indexed(a, 3)
    assert Packed([a, Atom("b", terminal=True)]) is Packed((a, Atom("b", terminal=True)))
    assert Atom("a", terminal=True) != Atom("a")


def test_constructed_symbol_descriptions():
    a, b = Atom("A"), Atom("b", terminal=True)
    assert describe(Primed(a)) == "prime(A)"
    assert describe(Indexed(a, 1)) == "idx(A,1)"
    assert describe(Staged(a, 3, 2)) == "stage(A,3,2)"
    assert describe(Packed((a, b))) == "pack(A b)"
    s = SetTagged(Indexed(a, 1), [((a,), True)])
    assert describe(s).startswith("set(idx(A,1)")


def test_sort_key_is_total_and_deterministic():
    syms = [Atom("B"), Atom("A"), Primed(Atom("A")), Indexed(Atom("A"), 1), Atom("a", terminal=True)]
    once = sorted(syms, key=sort_key)
    assert sorted(reversed(syms), key=sort_key) == once


def test_symbols_reject_bad_fields():
    with pytest.raises((ValueError, TypeError)):
        Indexed(Atom("A"), 0)
    with pytest.raises((ValueError, TypeError)):
        Atom("")


# -- parsing -------------------------------------------------------------------


def test_minimal_document():
    g = parse_grammar("kind rc\nnonterminals S\nterminals a\nstart S\nS -> a\n")
    assert isinstance(g, Grammar)
    assert len(g.productions) == 1
    p = g.productions[0]
    assert p.per == frozenset() and p.forb == frozenset()
    assert g.mode == "def1"


def test_t2_document(t2):
    assert g_shape(t2) == ("sc", "def2", (1, 0), 8, 2)
    assert {describe(s) for s in t2.nonterminals} == {"S", "A"}


def g_shape(g):
    return (g.kind, g.mode, g.degree, len(g.productions), len(g.nonterminals))


def test_conditions_and_labels():
    g = parse_grammar(
        "kind rc\nnonterminals S A B\nterminals a b\nstart S\n"
        "S -> A B per A for B\nA -> a   # trailing comment\nB -> b\n"
    )
    S, A, B = nt("S", "A", "B")
    assert g.productions[0] == Production(1, S, (A, B), conds(A), conds(B))
    assert [p.label for p in g.productions] == [1, 2, 3]


def test_string_conditions_in_sc():
    g = parse_grammar("kind sc\ndegree 2 1\nnonterminals S A\nterminals a\nstart S\nS -> A per ( a A ) for a\nA -> a\n")
    (a,), (A,) = t("a"), nt("A")
    assert g.productions[0].per == frozenset({(a, A)})
    assert g.productions[0].forb == frozenset({(a,)})


def test_default_modes():
    assert parse_grammar("kind sc\nnonterminals S\nterminals a\nstart S\nS -> a\n").mode == "def2"
    assert parse_grammar("kind forbidding\nnonterminals S\nterminals a\nstart S\nS -> a\n").mode == "def1"
    assert parse_grammar("kind rc\nmode def2\nnonterminals S\nterminals a\nstart S\nS -> a\n").mode == "def2"


def test_cd_document():
    g = parse_grammar(
        "kind cd\nnonterminals S A\nterminals a\nstart S\n"
        "component 1\nS -> A\ncomponent 2 Fin\nA -> a per A\nA -> a\n"
    )
    assert isinstance(g, CDSystem)
    assert g.names == ("P1", "Fin")
    assert [len(c) for c in g.components] == [1, 2]


@pytest.mark.parametrize(
    "text, fragment, line",
    [
        ("kind rc\nnonterminals S\nterminals a\nstart S\nS -> \n", "empty rhs", 5),
        ("kind rc\nnonterminals S\nterminals a\nstart S\nS -> b\n", "unknown symbol", 5),
        ("kind rc\nnonterminals S S\nterminals a\nstart S\nS -> a\n", "duplicate declaration", 2),
        ("kind rc\nkind sc\nnonterminals S\nterminals a\nstart S\nS -> a\n", "duplicate declaration", 2),
        ("kind rc\nnonterminals S A\nterminals a\nstart S\nS -> a per a\n", "", 5),
        ("kind sc\ndegree 1 1\nnonterminals S A\nterminals a\nstart S\nS -> a per A S\n", "at most one", 6),
        ("kind sc\ndegree 1 1\nnonterminals S A\nterminals a\nstart S\nS -> a per ( A A )\n", "longer than degree", 6),
        ("kind permitting\nnonterminals S A\nterminals a\nstart S\nS -> a for A\n", "permitting", 5),
        ("kind forbidding\nnonterminals S A\nterminals a\nstart S\nS -> a per A\n", "forbidding", 5),
        ("kind rc\nnonterminals S\nterminals a\nstart S\na -> S\n", "nonterminal", 5),
        ("kind rc\nnonterminals S per\nterminals a\nstart S\nS -> a\n", "reserved", 2),
        ("kind zz\n", "kind must be", 1),
        ("kind rc\nnonterminals S\nterminals a\nstart S\ncomponent 1\n", "only valid for kind cd", 5),
        ("kind rc\nnonterminals S\nterminals a\nstart S\nS -> a\nsymtab #0 = prime(Q\n", "", 6),
        ("kind rc\nnonterminals S\nterminals a\nstart S\nS -> a per ( S\n", "unterminated", 5),
    ],
)
def test_syntax_errors_carry_position(text, fragment, line):
    with pytest.raises(GrammarSyntaxError) as info:
        parse_grammar(text)
    err = info.value
    assert fragment in err.message
    assert err.line == line
    assert err.column >= 1


def test_missing_kind_and_start():
    with pytest.raises(GrammarSyntaxError, match="kind"):
        parse_grammar("nonterminals S\n")
    with pytest.raises(GrammarSyntaxError, match="start"):
        parse_grammar("kind rc\nnonterminals S\nterminals a\nS -> a\n")


def test_symtab_resolution_and_cycle():
    text = "kind rc\nnonterminals S #0 #1\nterminals a\nstart S\nS -> #1\n#1 -> #0\n#0 -> a\nsymtab #0 = prime(S)\nsymtab #1 = idx(#0,2)\n"
    g = parse_grammar(text)
    S = Atom("S")
    assert Indexed(Primed(S), 2) in g.nonterminals
    with pytest.raises(GrammarSyntaxError, match="cyclic"):
        parse_grammar("kind rc\nnonterminals S #0\nterminals a\nstart S\nS -> #0\n#0 -> a\nsymtab #0 = prime(#0)\n")


# -- rendering -----------------------------------------------------------------


def test_t2_round_trip(t2):
    assert parse_grammar(render_grammar(t2)) == t2


def test_primed_symbol_goes_through_symtab():
    S, A = nt("S", "A")
    (a,) = t("a")
    g = Grammar("rc", [S, A, Primed(A)], [a], S, [Production(1, S, (Primed(A),)), Production(2, Primed(A), (a,))])
    text = render_grammar(g)
    assert "symtab #0 = prime(A)" in text
    assert parse_grammar(text) == g


def test_render_is_canonical_and_byte_stable(t2):
    shuffled = t2.replace(productions=tuple(reversed(t2.productions)))
    assert render_grammar(shuffled) == render_grammar(t2)
    assert grammar_digest(t2) == grammar_digest(corpus("t2.rg"))


def test_cd_output_round_trips():
    S = Atom("S")
    (a,) = t("a")
    g = Grammar("rc", [S], [a], S, [Production(1, S, (a,))])
    cd = rc_to_permitting_cd(g)
    assert parse_grammar(render_grammar(cd)) == cd


@pytest.mark.parametrize("path", sorted(CORPUS.rglob("*.rg")), ids=lambda p: p.stem)
def test_corpus_round_trip(path):
    g = corpus(str(path.relative_to(CORPUS)))
    assert parse_grammar(render_grammar(g)) == g


def test_distinct_grammars_render_differently(t2):
    smaller = t2.replace(productions=t2.productions[:-1])
    assert render_grammar(smaller) != render_grammar(t2)
