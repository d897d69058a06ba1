import random

import pytest

from forcelab import (EMPTY, And, ForcelabError, Not, ParseError, and_,
                      atom_eq, atom_in, atom_in_class, atom_tr,
                      check_name, const, decode_formula, decode_valuation,
                      encode_formula, encode_valuation, exists, forall,
                      formula_rank, formula_to_sexp, hf_make, iff, name_const,
                      nat_encode, not_, or_, parse_formula,
                      subformula_closure, substitute, var)
from forcelab import corpus
from forcelab.formulas import Forall


x, y = var("x"), var("y")


def test_ranks():
    assert formula_rank(atom_eq(x, y)) == 0
    assert formula_rank(not_(atom_eq(x, y))) == 1
    assert formula_rank(and_([atom_eq(x, y), not_(atom_in(x, y))])) == 2
    assert formula_rank(and_([])) == 1


def test_interning_gives_identity():
    assert atom_eq(x, y) is atom_eq(var("x"), var("y"))
    assert and_([atom_eq(x, y)]) is and_([atom_eq(x, y)])


def test_free_variables():
    phi = forall(("x",), and_([atom_eq(x, y), atom_in(x, x)]))
    assert phi.free == {"y"}


def test_substitute_basic():
    out = substitute(atom_in(x, y), {"x": const(EMPTY)})
    assert out is atom_in(const(EMPTY), y)


def test_substitute_under_binder():
    phi = forall(("x",), atom_eq(x, y))
    out = substitute(phi, {"y": const(EMPTY)})
    assert out is forall(("x",), atom_eq(x, const(EMPTY)))


def test_substitute_bound_target_errors():
    with pytest.raises(ForcelabError):
        substitute(forall(("x",), atom_eq(x, y)), {"x": const(EMPTY)})


def test_substitute_open_term_errors():
    with pytest.raises(ForcelabError):
        substitute(atom_eq(x, y), {"x": var("z")})


def test_mixed_constant_kinds_rejected():
    with pytest.raises(ForcelabError):
        and_([atom_eq(const(EMPTY), x), atom_eq(name_const(check_name(EMPTY)), y)])


def test_parse_examples():
    phi = parse_formula("(forall (x) (in x (const (hf))))")
    assert isinstance(phi, Forall)
    assert phi is forall(("x",), atom_in(var("x"), const(EMPTY)))
    assert parse_formula("(and)") is and_([])


def test_parse_name_terms_need_notion():
    with pytest.raises(ParseError):
        parse_formula("(= (check (hf)) (check (hf)))")
    P = corpus.fork()
    phi = parse_formula("(= (check (hf)) (name))", P)
    assert phi is atom_eq(name_const(check_name(EMPTY)), name_const(check_name(EMPTY)))


def test_parse_errors_carry_position():
    with pytest.raises(ParseError):
        parse_formula("(= (var x))")
    with pytest.raises(ParseError):
        parse_formula("(unknown-head)")
    with pytest.raises(ParseError) as e:
        parse_formula("(and (= x y)")
    assert e.value.position is not None


def _random_formula(rng, depth=3):
    roll = rng.random()
    terms = [var(rng.choice("xyz")), const(EMPTY), const(nat_encode(rng.randrange(3)))]
    t = lambda: rng.choice(terms)
    if depth == 0 or roll < 0.35:
        return rng.choice([atom_eq(t(), t()), atom_in(t(), t()),
                           atom_in_class(t(), "A"), atom_tr(t(), t(), t())])
    if roll < 0.5:
        return not_(_random_formula(rng, depth - 1))
    if roll < 0.7:
        return and_([_random_formula(rng, depth - 1) for _ in range(rng.randrange(3))])
    if roll < 0.8:
        return or_([_random_formula(rng, depth - 1) for _ in range(rng.randrange(3))])
    ctor = forall if roll < 0.9 else exists
    vs = tuple(sorted({rng.choice("xyz") for _ in range(rng.randrange(1, 3))}))
    return ctor(vs, _random_formula(rng, depth - 1))


def test_parse_print_roundtrip_1000():
    rng = random.Random(2024)
    for _ in range(1000):
        phi = _random_formula(rng)
        assert parse_formula(formula_to_sexp(phi)) is phi


def test_print_parse_identity_on_canonical_text():
    rng = random.Random(7)
    for _ in range(200):
        text = formula_to_sexp(_random_formula(rng))
        assert formula_to_sexp(parse_formula(text)) == text


def test_rank_monotone_under_subformulas():
    rng = random.Random(5)
    for _ in range(100):
        phi = _random_formula(rng)
        for sub in subformula_closure([phi]):
            if sub is not phi:
                assert sub.rank < phi.rank or sub not in set(_strict_subs(phi))


def _strict_subs(phi):
    from forcelab import subformulas
    return subformulas(phi) - {phi}


def test_substituting_constants_preserves_rank():
    rng = random.Random(11)
    for _ in range(100):
        phi = _random_formula(rng)
        free = phi.free
        if not free or free & _collect_bound(phi):
            continue
        out = substitute(phi, {v: const(EMPTY) for v in free})
        assert out.rank == phi.rank


def _collect_bound(phi):
    from forcelab.formulas import Exists, Forall
    out = set()
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, (Forall, Exists)):
            out |= set(node.vars)
            stack.append(node.body)
        elif isinstance(node, Not):
            stack.append(node.sub)
        elif isinstance(node, And) or hasattr(node, "subs"):
            stack.extend(getattr(node, "subs", ()))
    return out


def test_godel_roundtrip():
    rng = random.Random(3)
    for _ in range(300):
        phi = _random_formula(rng)
        assert decode_formula(encode_formula(phi)) is phi
    assert decode_formula(EMPTY) is None
    assert decode_formula(nat_encode(5)) is None


def test_valuation_roundtrip():
    v = {"x": EMPTY, "y": nat_encode(2)}
    assert decode_valuation(encode_valuation(v)) == v
    assert decode_valuation(hf_make([EMPTY])) is None


def test_iff_encoding_meaning():
    # built from the primitive connectives only
    phi = iff(atom_eq(x, x), atom_eq(y, y))
    assert not phi.free - {"x", "y"}
    assert isinstance(phi, And)
