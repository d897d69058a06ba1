import itertools

import pytest

from forcelab import (EMPTY, EMPTY_NAME, ClosureError, ForcelabError,
                      and_, atom_eq, atom_in, atom_in_g, atomic_forcing,
                      atomic_recursion_instance, audit_forcing_relation,
                      check_name, compare_atomic_table, etr_solve, eval_class,
                      eval_name, exists, extension, forces, g_dot,
                      generic_filters, hf_make, name_const, name_make,
                      name_universe, nat_encode, not_, or_, truth_lemma_check,
                      truth_name, var, verify_solution)
from forcelab import corpus


@pytest.fixture
def fork_relation(fork):
    return atomic_forcing(fork, corpus.oracle_universe(fork))


def test_atomic_examples_on_the_fork(fork, fork_relation):
    FR = fork_relation
    a, b = fork.index("a"), fork.index("b")
    sigma = name_make([(EMPTY_NAME, a)])
    assert FR.decide("eq", a, sigma, check_name(hf_make([EMPTY])))
    assert FR.decide("eq", b, sigma, EMPTY_NAME)
    assert not FR.decide("eq", 0, sigma, check_name(hf_make([EMPTY])))
    assert not FR.decide("eq", 0, sigma, EMPTY_NAME)


def test_reflexivity_forced_by_top(fork_relation):
    for sigma in fork_relation.universe:
        assert fork_relation.decide("eq", 0, sigma, sigma)


def test_atomic_statement_surface(fork, fork_relation):
    from forcelab import AtomicStatement, ForcelabError, g_dot
    sigma = name_make([(EMPTY_NAME, fork.index("a"))])
    stmt = AtomicStatement("eq", sigma, check_name(hf_make([EMPTY])))
    assert fork_relation.forces_atomic(fork.index("a"), stmt)
    member = AtomicStatement("in_class", check_name(nat_encode(1)),
                             class_name=g_dot(fork))
    assert fork_relation.forces_atomic(fork.index("a"), member)
    with pytest.raises(ForcelabError):
        AtomicStatement("eq", sigma)
    with pytest.raises(ForcelabError):
        AtomicStatement("in_class", sigma)


def test_filter_atom_matches_order(corpus_notion):
    P = corpus_notion
    FR = atomic_forcing(P, corpus.oracle_universe(P))
    for p in P.conditions():
        for q in P.conditions():
            atom = atom_in_g(name_const(check_name(nat_encode(q))))
            assert forces(FR, p, atom) == P.le(p, q)


def test_filter_atom_against_direct_evaluation(corpus_notion):
    P = corpus_notion
    FR = atomic_forcing(P, corpus.oracle_universe(P))
    gd = g_dot(P)
    for G in generic_filters(P):
        for q in P.conditions():
            atom = atom_in_g(name_const(check_name(nat_encode(q))))
            forced = any(forces(FR, p, atom) for p in G.members)
            true = nat_encode(q) in eval_class(gd, G)
            assert forced == true


def test_empty_conjunction_is_forced(fork_relation):
    assert forces(fork_relation, 0, and_([]))
    assert not forces(fork_relation, 0, or_([]))


def test_negation_clause_restated(fork, fork_relation):
    FR = fork_relation
    pool = [atom_eq(name_const(s), name_const(t))
            for s in FR.universe[:4] for t in FR.universe[:4]]
    for phi in pool:
        for p in fork.conditions():
            lhs = forces(FR, p, not_(phi))
            rhs = not any(forces(FR, q, phi) for q in fork.down(p))
            assert lhs == rhs


def test_exists_nontop_filter_member(fork, fork_relation):
    # densely many conditions force ǎ or b̌ into the filter
    phi = exists(("x",), and_([atom_in_g(var("x")),
                               not_(atom_eq(var("x"), name_const(EMPTY_NAME)))]))
    assert forces(fork_relation, 0, phi)


def test_disjunction_equals_its_abbreviation(fork, fork_relation):
    FR = fork_relation
    atoms = [atom_eq(name_const(s), name_const(t))
             for s in FR.universe[:3] for t in FR.universe[:3]]
    for phi, psi in itertools.product(atoms[:4], repeat=2):
        direct = or_([phi, psi])
        abbreviated = not_(and_([not_(phi), not_(psi)]))
        for p in fork.conditions():
            assert forces(FR, p, direct) == forces(FR, p, abbreviated)


def test_exists_equals_its_abbreviation(fork, fork_relation):
    FR = fork_relation
    body = atom_in_g(var("x"))
    direct = exists(("x",), body)
    from forcelab import forall
    abbreviated = not_(forall(("x",), not_(body)))
    for p in fork.conditions():
        assert forces(FR, p, direct) == forces(FR, p, abbreviated)


def test_forces_rejects_open_and_ground(fork_relation):
    with pytest.raises(ForcelabError):
        forces(fork_relation, 0, atom_eq(var("x"), var("x")))
    from forcelab import const
    with pytest.raises(ForcelabError):
        forces(fork_relation, 0, atom_eq(const(EMPTY), const(EMPTY)))


def test_forces_checks_universe(fork_relation):
    stranger = check_name(nat_encode(4))
    phi = atom_eq(name_const(stranger), name_const(stranger))
    with pytest.raises(ForcelabError):
        forces(fork_relation, 0, phi)
    assert forces(fork_relation, 0, phi, check_universe=False)


def test_universe_must_be_closed(fork):
    sigma = name_make([(check_name(nat_encode(1)), 0)])
    with pytest.raises(ClosureError):
        atomic_forcing(fork, [sigma])


def test_audit_passes_on_corpus(corpus_notion):
    P = corpus_notion
    FR = atomic_forcing(P, name_universe(P, 1))
    report = audit_forcing_relation(FR)
    assert report.ok, report.failures()


def test_audit_catches_corruption(fork):
    FR = atomic_forcing(fork, name_universe(fork, 1))
    FR.materialize()
    sigma = FR.universe[1]
    a = fork.index("a")
    assert FR.decide("eq", a, sigma, sigma)
    FR._atomic[("eq", a, sigma, sigma)] = False
    report = audit_forcing_relation(FR)
    assert not report.ok
    assert "downward-closure" in report.failures() or "density" in report.failures()


def test_extension_quotient_identifications(fork):
    FR = atomic_forcing(fork, name_universe(fork, 1))
    a = fork.index("a")
    up_a = next(G for G in generic_filters(fork) if a in G.members)
    ext = extension(FR, up_a)
    sigma = name_make([(EMPTY_NAME, a)])
    tau = name_make([(EMPTY_NAME, 0)])
    assert ext.block_of(sigma) is ext.block_of(tau)
    assert ext.evaluation[sigma] is hf_make([EMPTY])
    assert ext.evaluation[tau] is hf_make([EMPTY])


def test_extension_filter_class_matches_direct(fork):
    FR = atomic_forcing(fork, corpus.oracle_universe(fork))
    for G in generic_filters(fork):
        ext = extension(FR, G)
        direct = eval_class(g_dot(fork), G)
        assert ext.structure.predicates["G"] == direct & set(ext.structure.domain)


def _quotient_eval(ext, phi, assignment):
    """Satisfaction computed on the quotient side only: membership and class
    relations on representatives, quantifiers over the blocks."""
    from forcelab import And, AtomEq, AtomIn, AtomInClass, AtomInG, Exists, Forall, Not, Or
    from forcelab.formulas import NameConst, Var

    def term_block(t):
        if isinstance(t, NameConst):
            return ext.block_of(t.name)
        if isinstance(t, Var):
            return assignment[t.name]
        raise AssertionError

    reps = sorted(set(ext.representative.values()), key=lambda n: n.key)
    if isinstance(phi, AtomEq):
        return term_block(phi.left) is term_block(phi.right)
    if isinstance(phi, AtomIn):
        return (term_block(phi.left), term_block(phi.right)) in ext.membership
    if isinstance(phi, AtomInClass):
        return term_block(phi.term) in ext.class_extensions[phi.ident]
    if isinstance(phi, AtomInG):
        return term_block(phi.term) in ext.class_extensions["G"]
    if isinstance(phi, Not):
        return not _quotient_eval(ext, phi.sub, assignment)
    if isinstance(phi, And):
        return all(_quotient_eval(ext, s, assignment) for s in phi.subs)
    if isinstance(phi, Or):
        return any(_quotient_eval(ext, s, assignment) for s in phi.subs)
    if isinstance(phi, (Forall, Exists)):
        want_all = isinstance(phi, Forall)
        for values in itertools.product(reps, repeat=len(phi.vars)):
            inner = dict(assignment)
            inner.update(zip(phi.vars, values))
            if _quotient_eval(ext, phi.body, inner) != want_all:
                return not want_all
        return want_all
    raise AssertionError(type(phi))


def test_quotient_satisfaction_agrees_with_direct(fork):
    from forcelab import ground_formula
    from forcelab.truth import eval_formula
    N = corpus.oracle_universe(fork)
    FR = atomic_forcing(fork, N)
    pool = corpus.oracle_pool(fork, N)
    for G in generic_filters(fork):
        ext = extension(FR, G)
        for phi in pool:
            direct = eval_formula(ext.structure, ground_formula(phi, ext), {})
            assert _quotient_eval(ext, phi, {}) == direct


def test_truth_lemma_on_oracle_pool(corpus_notion):
    P = corpus_notion
    N = corpus.oracle_universe(P)
    FR = atomic_forcing(P, N)
    ok, failure = truth_lemma_check(FR, corpus.oracle_pool(P, N))
    assert ok, failure


def test_atomic_relation_as_recursion_instance(fork):
    N = name_universe(fork, 1)
    FR = atomic_forcing(fork, N)
    inst, codec, stage_of = atomic_recursion_instance(fork, N)
    sol = etr_solve(inst)
    assert verify_solution(inst, sol) == (True, None)
    assert compare_atomic_table(FR, sol, codec)


def test_truth_name_atomic_pool(fork):
    N = corpus.oracle_universe(fork)
    FR = atomic_forcing(fork, N)
    ns = [name_const(n) for n in N[:3]]
    pool = [atom_eq(s, t) for s in ns for t in ns]
    tn = truth_name(FR, pool)
    assert tn.ok
    # the named class collects exactly the forced statements
    for G in generic_filters(fork):
        ext = extension(FR, G)
        values = eval_class(tn.tdot, G)
        from forcelab import encode_formula
        from forcelab.hfset import hf_pair
        for phi in pool:
            declared = hf_pair(encode_formula(phi), EMPTY) in values
            forced = any(forces(FR, p, phi) for p in G.members)
            assert declared == forced


def test_truth_name_empty_pool(fork_relation):
    tn = truth_name(fork_relation, [])
    assert tn.ok and not tn.tdot.entries


def test_truth_name_requires_closed_subformulas(fork_relation):
    phi = atom_eq(name_const(EMPTY_NAME), name_const(EMPTY_NAME))
    with pytest.raises(ClosureError):
        truth_name(fork_relation, [not_(phi)])
