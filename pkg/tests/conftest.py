from pathlib import Path

import pytest

from regrew import Atom, load_grammar

CORPUS = Path(__file__).parent / "corpus"


def corpus(name: str):
    return load_grammar(CORPUS / name)


def sc_corpus():
    return sorted((CORPUS / "sc").glob("*.rg"))


def rc_corpus():
    return sorted((CORPUS / "rc").glob("*.rg"))


def limited_corpus():
    return sorted((CORPUS / "limited").glob("*.rg"))


def nt(*names):
    return [Atom(n) for n in names]


def t(*names):
    return [Atom(n, terminal=True) for n in names]


def word(text: str):
    return tuple(Atom(x, terminal=True) for x in text.split())


def words(*texts):
    return {word(x) for x in texts}


def power_words(letters, bound):
    """Closed form of T_n: every power a_i^j with 1 <= j <= bound."""
    return {tuple(Atom(a, terminal=True) for _ in range(j)) for a in letters for j in range(1, bound + 1)}


@pytest.fixture
def t2():
    return corpus("t2.rg")
