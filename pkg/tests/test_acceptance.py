"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest -s tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""

import sys
import time
from collections import Counter

import pytest
from conftest import CORPUS, corpus, limited_corpus, power_words, rc_corpus, sc_corpus, words

from regrew import (
    GrammarShape,
    bounded_equiv,
    enumerate_bounded,
    fuzz_pipeline,
    oracle_words,
    pcd_to_sc,
    random_grammar,
    rc_def1_to_def2,
    rc_def2_to_def1,
    rc_limited_normal_form,
    rc_normalize_forbid,
    rc_to_permitting_cd,
    sc_def1_to_def2,
    sc_def2_to_def1,
    sc_def2_to_rc,
    validate_grammar,
)

SC_FUZZ = GrammarShape(kind="sc", nonterminals=4, productions=10, max_rhs=3)
# lemma2 output grows roughly with |N|^2 |P|^3; this is the largest shape
# whose 200 seeds finish inside the time budget at n=6
RC_FUZZ = GrammarShape(kind="rc", nonterminals=2, productions=2, max_rhs=2)
FUZZ_COUNT = 200


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} - {detail}", flush=True)
        assert ok, detail

    return emit


@pytest.fixture
def full_cap(monkeypatch):
    monkeypatch.setenv("REGREW_MAX_FORMS", str(10**6))


def _tally(verdicts):
    c = Counter(v.status for v in verdicts)
    return {k: c.get(k, 0) for k in ("equal", "counterexample", "inconclusive")}


def _corpus_then_fuzz(fixtures, transform, n, fuzz_shape, fuzz_op, reinterpret=None):
    """Verdicts over the fixtures followed by the fuzz report for the same transform."""
    verdicts = []
    for path in fixtures:
        g = corpus(str(path.relative_to(CORPUS)))
        if reinterpret:
            g = g.replace(mode=reinterpret)
        verdicts.append(bounded_equiv(g, transform(g), n))
    rep = fuzz_pipeline(fuzz_shape, [fuzz_op], FUZZ_COUNT, n)
    return verdicts, rep


def _fixture_sizes_ok(paths):
    gs = [corpus(str(p.relative_to(CORPUS))) for p in paths]
    return all(len(g.nonterminals) <= 6 and len(g.productions) <= 10 for g in gs)


def test_criterion_1_sc_to_rc(report, full_cap):
    fixtures = sc_corpus()
    start = time.perf_counter()
    verdicts, rep = _corpus_then_fuzz(fixtures, sc_def2_to_rc, 5, SC_FUZZ, "sc-to-rc")
    elapsed = time.perf_counter() - start
    fixed, fuzzed = _tally(verdicts), rep.totals()
    ok = (
        len(fixtures) >= 10
        and _fixture_sizes_ok(fixtures)
        and fixed["counterexample"] == 0
        and fuzzed["counterexample"] == 0
        and fuzzed["error"] == 0
        and len(rep.cases) == FUZZ_COUNT
        and elapsed < 300
    )
    report(1, ok, f"fixtures {len(fixtures)} {fixed}; fuzz {fuzzed}; n=5; {elapsed:.1f}s (limit 300s)")


def test_criterion_2_sc_mode_conversions(report, full_cap):
    fixtures = sc_corpus()
    v21, r21 = _corpus_then_fuzz(fixtures, sc_def2_to_def1, 6, SC_FUZZ, "sc-def2to1")
    def1_shape = GrammarShape(**{**SC_FUZZ.__dict__, "mode": "def1"})
    v12, r12 = _corpus_then_fuzz(fixtures, sc_def1_to_def2, 5, def1_shape, "sc-def1to2", reinterpret="def1")
    parts = [_tally(v21), r21.totals(), _tally(v12), r12.totals()]
    ok = all(p["counterexample"] == 0 for p in parts) and r21.totals()["error"] == 0 and r12.totals()["error"] == 0
    report(
        2,
        ok,
        f"def2to1 n=6 fixtures {parts[0]} fuzz {parts[1]}; def1to2 n=5 fixtures {parts[2]} fuzz {parts[3]}",
    )


def _lemma_case(g, n):
    """(structural problems, verdict) for lemma1 followed by lemma2."""
    problems = []
    norm = rc_normalize_forbid(g)
    if any(p.lhs in {c[0] for c in p.forb} for p in norm.productions):
        problems.append("lhs in For after lemma1")
    sys_ = rc_to_permitting_cd(norm)
    if any(p.forb or len(p.per) > 1 for p in sys_.all_productions()):
        problems.append("lemma2 output not permitting with |Per|<=1")
    if len(sys_.components) != 2 * len(norm.productions) + 1:
        problems.append(f"{len(sys_.components)} components for {len(norm.productions)} productions")
    return problems, bounded_equiv(g, sys_, n)


def test_criterion_3_lemma1_lemma2(report, full_cap):
    start = time.perf_counter()
    fixtures = rc_corpus()
    fixed, fuzzed, problems, inconclusive = [], [], [], []
    for path in fixtures:
        bad, v = _lemma_case(corpus(str(path.relative_to(CORPUS))), 6)
        problems += [f"{path.stem}: {b}" for b in bad]
        fixed.append(v)
    for seed in range(FUZZ_COUNT):
        bad, v = _lemma_case(random_grammar(RC_FUZZ, seed), 6)
        problems += [f"seed {seed}: {b}" for b in bad]
        fuzzed.append(v)
        if v.status == "inconclusive":
            inconclusive.append(seed)
    elapsed = time.perf_counter() - start
    tf, tz = _tally(fixed), _tally(fuzzed)
    ok = (
        len(fixtures) >= 10
        and not problems
        and tf["equal"] == len(fixtures)
        and tz["counterexample"] == 0
        and elapsed < 900
    )
    report(
        3,
        ok,
        f"fixtures {tf}; fuzz {tz} (inconclusive seeds {inconclusive}); "
        f"structural problems {len(problems)}; n=6 cap 1e6; {elapsed:.1f}s (limit 900s)",
    )


def test_criterion_4_rc_to_sc_end_to_end(report, full_cap):
    fixtures = limited_corpus()
    rows, ok = [], len(fixtures) >= 5
    for path in fixtures:
        g = corpus(str(path.relative_to(CORPUS)))
        start = time.perf_counter()
        sc = pcd_to_sc(rc_to_permitting_cd(rc_normalize_forbid(g)))
        v = bounded_equiv(g, sc, 4)
        elapsed = time.perf_counter() - start
        good = validate_grammar(g).classification["production_limited"] and v.status == "equal" and elapsed < 60
        ok = ok and good
        rows.append(f"{path.stem}={v.status}/{len(sc.productions)} rules/{elapsed:.1f}s")
    report(4, ok, "n=4, each < 60s: " + ", ".join(rows))


def test_criterion_5_limited_normal_form(report, full_cap):
    fixtures = limited_corpus()
    rows, ok = [], len(fixtures) >= 5
    for path in fixtures:
        g = corpus(str(path.relative_to(CORPUS)))
        out = rc_limited_normal_form(g)
        limited = validate_grammar(out).classification["limited"]
        v = bounded_equiv(g, out, 4)
        ok = ok and limited and v.status == "equal"
        rows.append(f"{path.stem}={'limited' if limited else 'NOT limited'}/{v.status}")
    report(5, ok, "n=4: " + ", ".join(rows))


def test_criterion_6_rc_mode_conversions(report, full_cap):
    fixtures = rc_corpus() + [CORPUS / "rc_t2.rg", CORPUS / "rc_t3.rg", CORPUS / "anbncn.rg"]
    results = Counter()
    for path in fixtures:
        g = corpus(str(path.relative_to(CORPUS)))
        g2 = g.replace(mode="def2")
        results["def1to2", bounded_equiv(g, rc_def1_to_def2(g), 6).status] += 1
        results["def2to1", bounded_equiv(g2, rc_def2_to_def1(g2), 6).status] += 1
        results["round trip", bounded_equiv(g, rc_def2_to_def1(rc_def1_to_def2(g)), 6).status] += 1
    ok = all(status == "equal" for _, status in results) and sum(results.values()) == 3 * len(fixtures)
    detail = ", ".join(f"{op} {st}={c}" for (op, st), c in sorted(results.items()))
    report(6, ok, f"{len(fixtures)} fixtures at n=6: {detail}")


def test_criterion_7_fixture_languages(report, full_cap):
    checks = []
    for name, letters in (("t2.rg", ["a1", "a2"]), ("t3.rg", ["a1", "a2", "a3"])):
        g = corpus(name)
        for n in (3, 4):
            checks.append((f"{name}@{n}", enumerate_bounded(g, n).word_set() == power_words(letters, n)))
    abc = enumerate_bounded(corpus("anbncn.rg"), 6)
    checks.append(("anbncn@6", not abc.truncated and abc.word_set() == words("a b c", "a a b b c c")))
    ok = all(good for _, good in checks)
    report(7, ok, ", ".join(f"{name} {'exact' if good else 'MISMATCH'}" for name, good in checks))


def test_criterion_8_oracle_agreement(report, full_cap):
    paths = sorted(CORPUS.rglob("*.rg"))
    mismatches, worker_diffs = [], []
    for path in paths:
        g = corpus(str(path.relative_to(CORPUS)))
        for n in range(1, 7):
            if enumerate_bounded(g, n).words != oracle_words(g, n):
                mismatches.append(f"{path.stem}@{n}")
        if enumerate_bounded(g, 6).to_json() != enumerate_bounded(g, 6, workers=2).to_json():
            worker_diffs.append(path.stem)
    ok = not mismatches and not worker_diffs
    report(
        8,
        ok,
        f"{len(paths)} corpus grammars, n=1..6: oracle mismatches {mismatches or 'none'}; "
        f"1 vs 2 workers differences {worker_diffs or 'none'}",
    )


def test_criterion_9_t_n_fixtures(report, full_cap):
    rows, ok = [], True
    for name, n, expected_nonterminals in (("t2.rg", 2, 2), ("t3.rg", 3, 2), ("rc_t2.rg", 2, 3), ("rc_t3.rg", 3, 4)):
        g = corpus(name)
        letters = [f"a{i}" for i in range(1, n + 1)]
        lang = enumerate_bounded(g, 5).word_set() == power_words(letters, 5)
        count = len(g.nonterminals) == expected_nonterminals
        ok = ok and lang and count
        rows.append(f"{name} language {'ok' if lang else 'WRONG'}, {len(g.nonterminals)} nonterminals")
    report(9, ok, "; ".join(rows) + "; minimality over all grammars is not checked")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
