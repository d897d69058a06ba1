import pytest

from forcelab import (EMPTY, BudgetError, build_collapse,
                      generic_filters, hf_make, is_dense, is_dense_below,
                      is_separative, make_notion, minimal_classes, parse_poset,
                      v_stage)
from forcelab import corpus
from forcelab.poset import CollapseFn, is_filter


def test_trivial_is_separative():
    ok, cx = is_separative(make_notion(["1"]))
    assert ok and cx is None


def test_chain_is_not_separative():
    ok, cx = is_separative(corpus.chain2())
    assert not ok and cx == (0, 1)


def test_fork_is_separative(fork):
    assert is_separative(fork) == (True, None)


def test_corpus_all_separative():
    for name, P in corpus.corpus_notions():
        assert is_separative(P)[0], name
        assert len(P) <= 5, name
    assert len(corpus.corpus_notions()) >= 10


def test_density(fork):
    a, b = fork.index("a"), fork.index("b")
    assert is_dense(fork, {a, b})
    assert not is_dense(fork, {a})
    assert is_dense_below(fork, {a}, a)


def _brute_force_generic(P):
    """Independent oracle: every filter meeting every dense subset."""
    n = len(P)
    subsets = [frozenset(i for i in range(n) if m >> i & 1) for m in range(1 << n)]
    dense = [D for D in subsets if is_dense(P, D)]
    return sorted(f for f in subsets if is_filter(P, f)
                  and all(f & D for D in dense))


@pytest.mark.parametrize("name", [name for name, _ in corpus.corpus_notions()])
def test_generic_filters_match_brute_force(name):
    P = dict(corpus.corpus_notions())[name]
    got = sorted(F.members for F in generic_filters(P))
    assert got == _brute_force_generic(P)


def test_fork_has_two_generic_filters(fork):
    filters = generic_filters(fork)
    assert sorted(sorted(F.members) for F in filters) == [[0, 1], [0, 2]]


def test_equivalent_teeth_share_a_filter():
    P = make_notion(["1", "a", "a2", "b"], [("a", "a2"), ("a2", "a")])
    filters = generic_filters(P)
    assert len(filters) == 2
    assert frozenset({0, 1, 2}) in {F.members for F in filters}


def test_collapse_counts_stage2():
    fa = build_collapse(2, [])
    # 7 partial injections + the two realizable supremum tokens
    assert len(fa) == 9
    fa_all = build_collapse(2, [], include_degenerate_tokens=True)
    # with the degenerate tokens: 7 + 4 + 2 = 13
    assert len(fa_all) == 13


def test_collapse_order_clauses():
    stage = v_stage(2)
    fa = build_collapse(2, list(stage))
    f = fa.fn_condition({0: EMPTY, 1: hf_make([EMPTY])})
    assert fa.le(f, fa.e_index[(0, 1)])       # f(0) ∈ f(1)
    assert not fa.le(f, fa.e_index[(1, 0)])
    a0 = fa.a_index[0]
    assert fa.le(f, a0)                        # f(0) ∈ A
    assert all(not fa.le(a0, q) for q in fa.conditions()
               if isinstance(fa.tags[q], CollapseFn) and fa.tags[q].graph)


def test_collapse_token_transitivity():
    fa = build_collapse(2, [])
    e01 = fa.e_index[(0, 1)]
    small = fa.fn_condition({0: EMPTY, 1: hf_make([EMPTY])})
    assert fa.le(small, e01)
    for q in fa.conditions():
        if fa.le(q, small):
            assert fa.le(q, e01)


def test_collapse_minimal_are_total_bijections():
    fa = build_collapse(2, [])
    minimal = {min(c) for c in minimal_classes(fa)}
    for m in minimal:
        tag = fa.tags[m]
        assert isinstance(tag, CollapseFn) and len(tag.graph) == fa.clock
    assert len(minimal) == 2


def test_collapse_stage3_has_24_generic_filters():
    fa = build_collapse(3, [])
    assert len(generic_filters(fa)) == 24


def test_collapse_budget():
    with pytest.raises(BudgetError):
        build_collapse(4, [])


def test_collapse_is_not_separative_at_finite_scale():
    # With finitely many targets a partial map can have every completion
    # land inside a supremum token's realizers, so nothing below it is
    # incompatible with the token; the forcing machinery must therefore
    # work on arbitrary preorders, and does (the collapse-truth tests).
    for n in (2, 3):
        ok, cx = is_separative(build_collapse(n, []))
        assert not ok and cx is not None


def test_compatibility_symmetry(corpus_notion):
    P = corpus_notion
    for p in P.conditions():
        assert P.compatible(P.one, p)
        for q in P.conditions():
            assert P.compatible(p, q) == P.compatible(q, p)


def test_poset_sexp_roundtrip(fork):
    text = fork.to_sexp()
    again = parse_poset(text)
    assert again.elements == fork.elements
    for p in fork.conditions():
        for q in fork.conditions():
            assert again.le(p, q) == fork.le(p, q)


def test_poset_parse_errors():
    with pytest.raises(Exception):
        parse_poset("(poset (elems a b))")
    with pytest.raises(Exception):
        parse_poset("(poset (elems a) (one zzz))")
