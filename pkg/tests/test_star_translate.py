import random

import pytest

from forcelab import (EMPTY_NAME, BudgetError, ForcelabError, and_, atom_eq,
                      atom_in, atom_in_g, atomic_forcing, check_name, forall,
                      forces, name_const, name_make, name_universe, nat_encode,
                      not_, or_, star_translate, var)
from forcelab import corpus


def test_filter_atom_reduction(fork):
    a = fork.index("a")
    phi = atom_in_g(name_const(check_name(nat_encode(a))))
    left, right = star_translate(phi, fork)
    assert left is name_make([(EMPTY_NAME, a)])
    assert right is name_make([(EMPTY_NAME, 0)])


def test_negated_filter_atom_reduction(fork):
    a = fork.index("a")
    left, right = star_translate(not_(atom_in_g(name_const(check_name(nat_encode(a))))), fork)
    assert left is name_make([(EMPTY_NAME, a)])
    assert right is EMPTY_NAME


def test_membership_reduction(fork):
    sigma = EMPTY_NAME
    tau = name_make([(check_name(nat_encode(1)), fork.index("b"))])
    left, right = star_translate(atom_in(name_const(sigma), name_const(tau)), fork)
    assert left is tau
    assert right is name_make(tau.entries + ((sigma, 0),))


def test_empty_connectives(fork):
    FR = atomic_forcing(fork, name_universe(fork, 1))
    a_t, b_t = star_translate(and_([]), fork)
    assert all(FR.decide("eq", p, a_t, b_t) for p in fork.conditions())
    a_f, b_f = star_translate(or_([]), fork)
    assert not any(FR.decide("eq", p, a_f, b_f) for p in fork.conditions())


@pytest.mark.parametrize("name", [n for n, _ in corpus.corpus_notions()])
def test_soundness_on_random_sentences(name):
    P = dict(corpus.corpus_notions())[name]
    N = name_universe(P, 1)
    FR = atomic_forcing(P, N)
    names = corpus._sample_names(P, N)
    rng = random.Random(101)
    for _ in range(60):
        sentence = corpus.random_qf_sentence(rng, P, names)
        left, right = star_translate(sentence, P)
        for p in P.conditions():
            assert forces(FR, p, sentence, check_universe=False) == \
                FR.decide("eq", p, left, right), (name, p)


def test_rejects_quantifiers_and_open_formulas(fork):
    with pytest.raises(ForcelabError):
        star_translate(forall(("x",), atom_eq(var("x"), var("x"))), fork)
    with pytest.raises(ForcelabError):
        star_translate(atom_eq(var("x"), var("x")), fork)


def test_budget_aborts_blowup(fork):
    sigma = name_const(EMPTY_NAME)
    phi = atom_eq(sigma, sigma)
    for _ in range(8):
        phi = or_([phi, phi, phi])
    with pytest.raises(BudgetError):
        star_translate(phi, fork, budget=100)
