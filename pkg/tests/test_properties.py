from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from regrew import (
    CDEngine,
    GrammarShape,
    applicable,
    enumerate_bounded,
    enumerate_bounded_cd,
    oracle_words,
    parse_grammar,
    random_grammar,
    rc_normalize_forbid,
    rc_to_permitting_cd,
    render_grammar,
    successors,
    validate_grammar,
)
from regrew.cd import _Budget

FAST = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])

shapes = st.builds(
    GrammarShape,
    kind=st.sampled_from(["rc", "sc", "permitting", "forbidding"]),
    nonterminals=st.integers(1, 3),
    terminals=st.integers(1, 2),
    productions=st.integers(1, 5),
    max_rhs=st.integers(1, 2),
    per_density=st.floats(0, 1),
    forb_density=st.floats(0, 1),
)
seeds = st.integers(0, 10**6)
small_rc = st.builds(
    GrammarShape,
    kind=st.just("rc"),
    nonterminals=st.integers(1, 2),
    terminals=st.integers(1, 2),
    productions=st.integers(1, 3),
    max_rhs=st.integers(1, 2),
)


def _forms(g, n, limit=40):
    """Sentential forms reachable within length n, breadth first."""
    seen = [(g.start,)]
    i = 0
    while i < len(seen) and len(seen) < limit:
        for s in successors(g, seen[i]):
            if len(s.result) <= n and s.result not in seen:
                seen.append(s.result)
        i += 1
    return seen


@FAST
@given(shapes, seeds)
def test_random_grammars_validate(shape, seed):
    assert validate_grammar(random_grammar(shape, seed)).ok


@FAST
@given(shapes, seeds)
def test_render_then_parse_is_identity(shape, seed):
    g = random_grammar(shape, seed)
    text = render_grammar(g)
    again = parse_grammar(text)
    assert again == g
    assert render_grammar(again) == text


@FAST
@given(shapes, seeds)
def test_engine_agrees_with_oracle(shape, seed):
    g = random_grammar(shape, seed)
    assert enumerate_bounded(g, 4).words == oracle_words(g, 4)


@FAST
@given(shapes, seeds)
def test_smaller_bound_is_a_prefix_of_larger(shape, seed):
    g = random_grammar(shape, seed)
    small = enumerate_bounded(g, 3).word_set()
    large = enumerate_bounded(g, 5).word_set()
    assert small == {w for w in large if len(w) <= 3}


@FAST
@given(shapes, seeds)
def test_successors_never_shrink_forms(shape, seed):
    g = random_grammar(shape, seed)
    for form in _forms(g, 5):
        for s in successors(g, form):
            assert len(s.result) >= len(form)
            p = next(q for q in g.productions if q.label == s.label)
            assert s.result == form[: s.position] + p.rhs + form[s.position + 1 :]


@FAST
@given(st.sampled_from(["rc", "permitting", "forbidding"]), seeds)
def test_modes_coincide_without_self_conditions(kind, seed):
    g = random_grammar(GrammarShape(kind=kind, nonterminals=3, productions=4), seed)
    clean = tuple(p for p in g.productions if (p.lhs,) not in p.per | p.forb)
    if not clean:
        return
    g = g.replace(productions=clean)
    one = enumerate_bounded(g.replace(mode="def1"), 4).word_set()
    two = enumerate_bounded(g.replace(mode="def2"), 4).word_set()
    assert one == two


@FAST
@given(seeds)
def test_self_forbidding_rule_is_dead_under_def2(seed):
    g = random_grammar(GrammarShape(kind="rc", forb_density=1.0), seed).replace(mode="def2")
    dead = {p.label for p in g.productions if (p.lhs,) in p.forb}
    for form in _forms(g, 5):
        assert not dead & {s.label for s in successors(g, form)}


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(small_rc, seeds)
def test_t_steps_end_in_component_terminal_forms(shape, seed):
    sys_ = rc_to_permitting_cd(rc_normalize_forbid(random_grammar(shape, seed)))
    trace = []
    enumerate_bounded_cd(sys_, 3, trace=trace)
    for step in trace:
        comp = sys_.components[step.component - 1]
        assert not any(p.lhs == s and applicable(p, step.result, i, "def1") for i, s in enumerate(step.result) for p in comp)


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(small_rc, seeds)
def test_memoized_targets_equal_direct_t_step(shape, seed):
    sys_ = rc_to_permitting_cd(rc_normalize_forbid(random_grammar(shape, seed)))
    eng = CDEngine(sys_)
    trace = []
    enumerate_bounded_cd(sys_, 3, trace=trace)
    for k, form in sorted({(s.component - 1, s.source) for s in trace}, key=repr)[:20]:
        assert set(eng.targets(k, form, 3, _Budget(10**6))) == set(eng.t_step(k, form, 3, _Budget(10**6)))
