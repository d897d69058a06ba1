import itertools

import pytest

from forcelab import (EMPTY, EMPTY_NAME, BudgetError, ForcelabError, a_dot,
                      build_collapse, check_name, eps_dot, eval_class,
                      eval_name, g_dot, generic_filters, hf_make, hf_pair,
                      n_dot, name_make, name_to_hf, name_to_sexp,
                      name_universe, nat_encode, op_name, parse_name,
                      subnames, v_stage)
from forcelab import corpus, sexpr
from forcelab.poset import CollapseFn


def test_check_name_shapes():
    assert check_name(EMPTY) is EMPTY_NAME
    one = hf_make([EMPTY])
    assert check_name(one) is name_make([(EMPTY_NAME, 0)])


def test_check_name_evaluates_to_itself(corpus_notion):
    P = corpus_notion
    for G in generic_filters(P):
        for x in v_stage(3):
            assert eval_name(check_name(x), G) is x


def test_check_name_injectivity(corpus_notion):
    P = corpus_notion
    stage = v_stage(3)
    for G in generic_filters(P):
        values = [eval_name(check_name(x), G) for x in stage]
        assert len(set(values)) == len(stage)


def test_op_name_dedup_at_equal_arguments():
    op = op_name(EMPTY_NAME, EMPTY_NAME)
    assert len(op.entries) == 1  # {⟨σ,1⟩} appears once after extensionality


def test_op_name_rank():
    sigma = check_name(nat_encode(2))
    tau = EMPTY_NAME
    assert op_name(sigma, tau).rank == max(sigma.rank, tau.rank) + 2


def test_op_name_evaluates_to_kuratowski_pair(fork):
    names = name_universe(fork, 1)
    for G in generic_filters(fork):
        for sigma, tau in itertools.product(names[:5], repeat=2):
            got = eval_name(op_name(sigma, tau), G)
            assert got is hf_pair(eval_name(sigma, G), eval_name(tau, G))


def test_g_dot_extension(fork):
    gd = g_dot(fork)
    for G in generic_filters(fork):
        assert eval_class(gd, G) == {nat_encode(i) for i in G.members}


def test_collapse_names_require_collapse_notion(fork):
    with pytest.raises(ForcelabError):
        eps_dot(fork)


def test_n_dot_names_the_preimage_slot():
    fa = build_collapse(2, [])
    for G in generic_filters(fa):
        minimal = min(G.members, key=lambda p: len(fa.down(p)))
        fn = dict(fa.tags[minimal].graph)
        for a in fa.targets:
            inverse = next(i for i, t in fn.items() if t is a)
            assert eval_name(n_dot(fa, a), G) is nat_encode(inverse)


def test_eps_dot_is_the_membership_copy():
    fa = build_collapse(2, [])
    eps = eps_dot(fa)
    for G in generic_filters(fa):
        minimal = min(G.members, key=lambda p: len(fa.down(p)))
        fn = dict(fa.tags[minimal].graph)
        want = {hf_pair(nat_encode(i), nat_encode(j))
                for i, ti in fn.items() for j, tj in fn.items() if ti in tj}
        assert set(eval_name(eps, G).children) == want


def test_a_dot_extension_is_the_copied_parameter():
    stage = v_stage(2)
    A = [stage[1]]
    fa = build_collapse(2, A)
    ad = a_dot(fa, A)
    for G in generic_filters(fa):
        minimal = min(G.members, key=lambda p: len(fa.down(p)))
        fn = dict(fa.tags[minimal].graph)
        want = {nat_encode(i) for i, t in fn.items() if t in set(A)}
        assert eval_class(ad, G) == want


def test_a_dot_validates_parameter():
    fa = build_collapse(2, [])
    with pytest.raises(ForcelabError):
        a_dot(fa, [EMPTY])


def test_universe_counts():
    trivial = corpus.corpus_notions()[0][1]
    assert len(name_universe(trivial, 1)) == 2
    fork = corpus.fork()
    assert len(name_universe(fork, 1)) == 2 ** 3
    # closed form |N_{k+1}| = 2^(|N_k|·|P|)
    assert len(name_universe(trivial, 2)) == 2 ** (2 * 1)


def test_universe_budget():
    with pytest.raises(BudgetError):
        name_universe(corpus.fork(), 2)  # 2^24 names
    with pytest.raises(BudgetError):
        name_universe(corpus.fork(), 3)


def test_seeded_universe_is_subname_closed(fork):
    sigma = name_make([(check_name(nat_encode(1)), 2)])
    seeded = name_universe(fork, seeds=[op_name(EMPTY_NAME, sigma)])
    assert sigma in seeded and EMPTY_NAME in seeded
    for n in seeded:
        assert subnames(n) <= set(seeded)


def test_eval_respects_conditions(fork):
    a = fork.index("a")
    sigma = name_make([(EMPTY_NAME, a)])
    up_a, up_b = sorted(generic_filters(fork), key=lambda G: sorted(G.members))
    assert eval_name(sigma, up_a) is hf_make([EMPTY])
    assert eval_name(sigma, up_b) is EMPTY


def test_eval_rank_bound(fork):
    for G in generic_filters(fork):
        for sigma in name_universe(fork, 1):
            assert eval_name(sigma, G).rank <= sigma.rank


def test_name_sexp_roundtrip(fork):
    sigma = name_make([(check_name(nat_encode(1)), fork.index("b")),
                       (EMPTY_NAME, 0)])
    text = name_to_sexp(sigma, fork)
    assert parse_name(sexpr.read(text), fork) is sigma
    assert parse_name(sexpr.read("(opname (check (hf)) (name))"), fork) \
        is op_name(EMPTY_NAME, EMPTY_NAME)


def test_name_to_hf_injective(fork):
    names = name_universe(fork, 1)
    images = {name_to_hf(n) for n in names}
    assert len(images) == len(names)
