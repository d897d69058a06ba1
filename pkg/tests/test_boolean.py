import pytest

from forcelab import (EMPTY_NAME, SeparativityError, atom_eq, atomic_forcing,
                      audit_boolean_algebra, boolean_completion, boolean_values,
                      lindenbaum_value, name_const, name_make,
                      name_universe)
from forcelab import corpus


def test_fork_completion_is_the_four_element_algebra(fork):
    bc = boolean_completion(fork)
    B = bc.algebra
    assert len(B) == 4
    a, b = fork.index("a"), fork.index("b")
    assert bc.embed(a) == frozenset({a})
    assert bc.embed(b) == frozenset({b})
    assert bc.embed(0) == B.one


def test_trivial_completion_is_two_element():
    trivial = corpus.corpus_notions()[0][1]
    assert len(boolean_completion(trivial).algebra) == 2


def test_nonseparative_is_refused():
    with pytest.raises(SeparativityError):
        boolean_completion(corpus.chain2())


def test_algebra_laws(corpus_notion):
    report = audit_boolean_algebra(boolean_completion(corpus_notion).algebra)
    assert report.ok, report.failures()


def test_embedding_identifies_exactly_equivalents(corpus_notion):
    P = corpus_notion
    bc = boolean_completion(P)
    for p in P.conditions():
        for q in P.conditions():
            assert (bc.embed(p) == bc.embed(q)) == P.equivalent(p, q)


def test_embedding_is_dense_and_order_true(corpus_notion):
    P = corpus_notion
    bc = boolean_completion(P)
    B = bc.algebra
    for p in P.conditions():
        for q in P.conditions():
            assert B.le(bc.embed(p), bc.embed(q)) == P.le(p, q)
            assert P.compatible(p, q) == (B.meet(bc.embed(p), bc.embed(q)) != B.zero)
    for u in B.elements:
        if u != B.zero:
            assert any(B.le(bc.embed(p), u) for p in P.conditions())


def test_boolean_values_reflexivity(fork):
    bc = boolean_completion(fork)
    bv = boolean_values(bc)
    for sigma in name_universe(fork, 1):
        assert bv.value("eq", sigma, sigma) == bc.algebra.one


def test_boolean_value_hand_unfolded(fork):
    # ⟦∅-name = {(∅̌,a)}⟧ is the complement of the embedded a
    a = fork.index("a")
    sigma = name_make([(EMPTY_NAME, a)])
    bc = boolean_completion(fork)
    bv = boolean_values(bc)
    assert bv.value("eq", EMPTY_NAME, sigma) == bc.algebra.neg(bc.embed(a))


def test_values_cohere_with_the_table(corpus_notion):
    P = corpus_notion
    N = name_universe(P, 1)
    FR = atomic_forcing(P, N)
    bv = boolean_values(boolean_completion(P))
    for kind in ("in", "sub", "eq"):
        for s in N:
            for t in N:
                for p in P.conditions():
                    assert bv.derived_forces(p, kind, s, t) == FR.decide(kind, p, s, t)


def test_lindenbaum_values_are_regular_open(corpus_notion):
    P = corpus_notion
    N = name_universe(P, 1)
    FR = atomic_forcing(P, N)
    B = boolean_completion(P).algebra
    for s in N[:6]:
        for t in N[:6]:
            lam = lindenbaum_value(FR, atom_eq(name_const(s), name_const(t)))
            assert B.is_element(lam)
