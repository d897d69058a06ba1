"""Parse trees for the finite-scale infinitary languages.

Connectives take finite sequences of subformulas (the empty conjunction is
true, the empty disjunction false); quantifiers bind blocks of variables.
Nodes and terms are interned, so structural equality is identity and every
node carries a cached parse-tree rank and free-variable set.

Atoms come in two constant flavours that never mix inside one formula:
ground constants (truth language, over an actual structure) and name
constants (forcing language, over a notion).
"""

from __future__ import annotations

from typing import Iterable, Sequence

from . import sexpr
from .errors import EncodingError, ForcelabError, ParseError
from .hfset import (HFSet, hf_list, hf_make, hf_pair, hf_unlist,
                    hf_unpair, nat_decode, nat_encode)
from .names import PName, name_make, name_to_hf, op_name, parse_name
from .poset import ForcingNotion

_intern: dict[tuple, object] = {}


def _mk(cls, *fields):
    key = (cls, *fields)
    node = _intern.get(key)
    if node is None:
        node = cls(*fields)
        _intern[key] = node
    return node


class Term:
    __slots__ = ()


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name


class GroundConst(Term):
    __slots__ = ("value",)

    def __init__(self, value: HFSet):
        self.value = value


class NameConst(Term):
    __slots__ = ("name",)

    def __init__(self, name: PName):
        self.name = name


class PairTerm(Term):
    """Deferred op-pair of two terms; collapses to a NameConst once both sides are names."""

    __slots__ = ("left", "right")

    def __init__(self, left: Term, right: Term):
        self.left = left
        self.right = right


def var(name: str) -> Var:
    if not name:
        raise ForcelabError("empty variable name")
    return _mk(Var, name)


def const(value: HFSet) -> GroundConst:
    return _mk(GroundConst, value)


def name_const(name: PName) -> NameConst:
    return _mk(NameConst, name)


def pair_term(left: Term, right: Term) -> Term:
    if isinstance(left, NameConst) and isinstance(right, NameConst):
        return name_const(op_name(left.name, right.name))
    return _mk(PairTerm, left, right)


def term_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, PairTerm):
        return term_vars(t.left) | term_vars(t.right)
    return frozenset()


def _term_kind(t: Term) -> frozenset[str]:
    if isinstance(t, GroundConst):
        return frozenset(("ground",))
    if isinstance(t, (NameConst, PairTerm)):
        return frozenset(("name",))
    return frozenset()


class Formula:
    __slots__ = ("rank", "free", "free_sorted", "const_kinds")

    rank: int
    free: frozenset[str]
    free_sorted: tuple[str, ...]
    const_kinds: frozenset[str]

    def _finish(self, rank: int, free: frozenset[str], kinds: frozenset[str]):
        if kinds >= {"ground", "name"}:
            raise ForcelabError("a formula may not mix ground constants with name constants")
        self.rank = rank
        self.free = free
        self.free_sorted = tuple(sorted(free))
        self.const_kinds = kinds

    def __repr__(self) -> str:
        return formula_to_sexp(self)


class AtomEq(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Term, right: Term):
        self.left = left
        self.right = right
        self._finish(0, term_vars(left) | term_vars(right),
                     _term_kind(left) | _term_kind(right))


class AtomIn(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Term, right: Term):
        self.left = left
        self.right = right
        self._finish(0, term_vars(left) | term_vars(right),
                     _term_kind(left) | _term_kind(right))


class AtomInClass(Formula):
    __slots__ = ("term", "ident")

    def __init__(self, term: Term, ident: str):
        self.term = term
        self.ident = ident
        self._finish(0, term_vars(term), _term_kind(term))


class AtomInG(Formula):
    __slots__ = ("term",)

    def __init__(self, term: Term):
        self.term = term
        self._finish(0, term_vars(term), _term_kind(term) | {"name"})


class AtomTr(Formula):
    """Iterated-truth atom: stage, formula code, valuation code."""

    __slots__ = ("stage", "code", "valuation")

    def __init__(self, stage: Term, code: Term, valuation: Term):
        self.stage = stage
        self.code = code
        self.valuation = valuation
        self._finish(0, term_vars(stage) | term_vars(code) | term_vars(valuation),
                     _term_kind(stage) | _term_kind(code) | _term_kind(valuation))


class Not(Formula):
    __slots__ = ("sub",)

    def __init__(self, sub: Formula):
        self.sub = sub
        self._finish(1 + sub.rank, sub.free, sub.const_kinds)


class And(Formula):
    __slots__ = ("subs",)

    def __init__(self, subs: tuple[Formula, ...]):
        self.subs = subs
        self._finish(1 + max((s.rank for s in subs), default=0),
                     frozenset().union(*(s.free for s in subs)),
                     frozenset().union(*(s.const_kinds for s in subs)))


class Or(Formula):
    __slots__ = ("subs",)

    def __init__(self, subs: tuple[Formula, ...]):
        self.subs = subs
        self._finish(1 + max((s.rank for s in subs), default=0),
                     frozenset().union(*(s.free for s in subs)),
                     frozenset().union(*(s.const_kinds for s in subs)))


class Forall(Formula):
    __slots__ = ("vars", "body")

    def __init__(self, vars: tuple[str, ...], body: Formula):
        self.vars = vars
        self.body = body
        self._finish(1 + body.rank, body.free - set(vars), body.const_kinds)


class Exists(Formula):
    __slots__ = ("vars", "body")

    def __init__(self, vars: tuple[str, ...], body: Formula):
        self.vars = vars
        self.body = body
        self._finish(1 + body.rank, body.free - set(vars), body.const_kinds)


def atom_eq(left: Term, right: Term) -> Formula:
    return _mk(AtomEq, left, right)


def atom_in(left: Term, right: Term) -> Formula:
    return _mk(AtomIn, left, right)


def atom_in_class(term: Term, ident: str) -> Formula:
    return _mk(AtomInClass, term, ident)


def atom_in_g(term: Term) -> Formula:
    return _mk(AtomInG, term)


def atom_tr(stage: Term, code: Term, valuation: Term) -> Formula:
    return _mk(AtomTr, stage, code, valuation)


def not_(sub: Formula) -> Formula:
    return _mk(Not, sub)


def and_(subs: Iterable[Formula]) -> Formula:
    return _mk(And, tuple(subs))


def or_(subs: Iterable[Formula]) -> Formula:
    return _mk(Or, tuple(subs))


def forall(vars: Sequence[str], body: Formula) -> Formula:
    return _mk(Forall, tuple(vars), body)


def exists(vars: Sequence[str], body: Formula) -> Formula:
    return _mk(Exists, tuple(vars), body)


def iff(a: Formula, b: Formula) -> Formula:
    return and_([or_([not_(a), b]), or_([not_(b), a])])


def implies(a: Formula, b: Formula) -> Formula:
    return not_(and_([a, not_(b)]))


def formula_rank(phi: Formula) -> int:
    return phi.rank


def free_variables(phi: Formula) -> frozenset[str]:
    return phi.free


def subformulas(phi: Formula) -> set[Formula]:
    out = {phi}
    if isinstance(phi, Not):
        out |= subformulas(phi.sub)
    elif isinstance(phi, (And, Or)):
        for s in phi.subs:
            out |= subformulas(s)
    elif isinstance(phi, (Forall, Exists)):
        out |= subformulas(phi.body)
    return out


def subformula_closure(pool: Iterable[Formula]) -> tuple[Formula, ...]:
    out: set[Formula] = set()
    for phi in pool:
        out |= subformulas(phi)
    return tuple(sorted(out, key=lambda f: (f.rank, formula_to_sexp(f))))


# ---------------------------------------------------------------------------
# Substitution.

def substitute(phi: Formula, bindings: dict[str, Term]) -> Formula:
    """Simultaneous substitution of closed terms for free variables."""
    for v, t in bindings.items():
        if term_vars(t):
            raise ForcelabError(f"substituted term for {v} must be closed")
    return _subst(phi, bindings, {})


def _subst_term(t: Term, bindings: dict[str, Term]) -> Term:
    if isinstance(t, Var):
        return bindings.get(t.name, t)
    if isinstance(t, PairTerm):
        return pair_term(_subst_term(t.left, bindings), _subst_term(t.right, bindings))
    return t


def _subst(phi: Formula, bindings: dict[str, Term], memo: dict) -> Formula:
    got = memo.get(phi)
    if got is not None:
        return got
    if isinstance(phi, AtomEq):
        out = atom_eq(_subst_term(phi.left, bindings), _subst_term(phi.right, bindings))
    elif isinstance(phi, AtomIn):
        out = atom_in(_subst_term(phi.left, bindings), _subst_term(phi.right, bindings))
    elif isinstance(phi, AtomInClass):
        out = atom_in_class(_subst_term(phi.term, bindings), phi.ident)
    elif isinstance(phi, AtomInG):
        out = atom_in_g(_subst_term(phi.term, bindings))
    elif isinstance(phi, AtomTr):
        out = atom_tr(_subst_term(phi.stage, bindings), _subst_term(phi.code, bindings),
                      _subst_term(phi.valuation, bindings))
    elif isinstance(phi, Not):
        out = not_(_subst(phi.sub, bindings, memo))
    elif isinstance(phi, And):
        out = and_(_subst(s, bindings, memo) for s in phi.subs)
    elif isinstance(phi, Or):
        out = or_(_subst(s, bindings, memo) for s in phi.subs)
    elif isinstance(phi, (Forall, Exists)):
        hit = set(phi.vars) & set(bindings)
        if hit:
            raise ForcelabError(f"substitution targets bound variable(s) {sorted(hit)}")
        body = _subst(phi.body, bindings, memo)
        out = forall(phi.vars, body) if isinstance(phi, Forall) else exists(phi.vars, body)
    else:
        raise ForcelabError(f"unknown formula node {type(phi).__name__}")
    memo[phi] = out
    return out


# ---------------------------------------------------------------------------
# Text form.

def parse_hf(form) -> HFSet:
    if not isinstance(form, list) or not form or form[0] != "hf":
        raise ParseError("expected (hf ...)")
    return hf_make(parse_hf(child) for child in form[1:])


def _parse_term(form, notion: ForcingNotion | None) -> Term:
    if isinstance(form, str):
        return var(form)  # bare symbols are variable shorthand
    if not isinstance(form, list) or not form:
        raise ParseError(f"expected a term, got {sexpr.show(form)}")
    head = form[0]
    if head == "var":
        if len(form) != 2 or not isinstance(form[1], str):
            raise ParseError("(var <identifier>) takes one identifier")
        return var(form[1])
    if head == "const":
        if len(form) != 2:
            raise ParseError("(const <hf>) takes one set")
        return const(parse_hf(form[1]))
    if head in ("name", "check", "opname"):
        if notion is None:
            raise ParseError("name constants need a notion for condition tokens")
        return name_const(parse_name(form, notion))
    if head == "opterm":
        if len(form) != 3:
            raise ParseError("(opterm <t> <t>) takes two terms")
        return pair_term(_parse_term(form[1], notion), _parse_term(form[2], notion))
    raise ParseError(f"unknown term form {head!r}")


def _parse_formula(form, notion: ForcingNotion | None) -> Formula:
    if not isinstance(form, list) or not form:
        raise ParseError(f"expected a formula, got {sexpr.show(form)}")
    head = form[0]
    if head == "=":
        if len(form) != 3:
            raise ParseError("(= t t) takes two terms")
        return atom_eq(_parse_term(form[1], notion), _parse_term(form[2], notion))
    if head == "in":
        if len(form) != 3:
            raise ParseError("(in t t) takes two terms")
        return atom_in(_parse_term(form[1], notion), _parse_term(form[2], notion))
    if head == "in-class":
        if len(form) != 3 or not isinstance(form[2], str):
            raise ParseError("(in-class t <identifier>) takes a term and an identifier")
        return atom_in_class(_parse_term(form[1], notion), form[2])
    if head == "in-G":
        if len(form) != 2:
            raise ParseError("(in-G t) takes one term")
        return atom_in_g(_parse_term(form[1], notion))
    if head == "tr":
        if len(form) != 4:
            raise ParseError("(tr t t t) takes three terms")
        return atom_tr(*(_parse_term(f, notion) for f in form[1:]))
    if head == "not":
        if len(form) != 2:
            raise ParseError("(not f) takes one formula")
        return not_(_parse_formula(form[1], notion))
    if head == "and":
        return and_(_parse_formula(f, notion) for f in form[1:])
    if head == "or":
        return or_(_parse_formula(f, notion) for f in form[1:])
    if head in ("forall", "exists"):
        if len(form) != 3 or not isinstance(form[1], list):
            raise ParseError(f"({head} (v*) f) takes a variable list and a formula")
        vs = tuple(form[1])
        body = _parse_formula(form[2], notion)
        return forall(vs, body) if head == "forall" else exists(vs, body)
    raise ParseError(f"unknown formula form {head!r}")


def parse_formula(text: str, notion: ForcingNotion | None = None) -> Formula:
    return _parse_formula(sexpr.read(text), notion)


def _term_sexp(t: Term, notion: ForcingNotion | None):
    if isinstance(t, Var):
        return ["var", t.name]
    if isinstance(t, GroundConst):
        return ["const", _hf_sexp(t.value)]
    if isinstance(t, NameConst):
        return _name_sexp(t.name, notion)
    if isinstance(t, PairTerm):
        return ["opterm", _term_sexp(t.left, notion), _term_sexp(t.right, notion)]
    raise ForcelabError(f"unknown term {type(t).__name__}")


def _hf_sexp(x: HFSet):
    return ["hf"] + [_hf_sexp(c) for c in x.children]


def _name_sexp(n: PName, notion: ForcingNotion | None):
    def cond(r: int) -> str:
        return notion.elements[r] if notion is not None else str(r)

    return ["name"] + [["pair", _name_sexp(m, notion), cond(r)] for m, r in n.entries]


def _formula_sexp(phi: Formula, notion: ForcingNotion | None):
    if isinstance(phi, AtomEq):
        return ["=", _term_sexp(phi.left, notion), _term_sexp(phi.right, notion)]
    if isinstance(phi, AtomIn):
        return ["in", _term_sexp(phi.left, notion), _term_sexp(phi.right, notion)]
    if isinstance(phi, AtomInClass):
        return ["in-class", _term_sexp(phi.term, notion), phi.ident]
    if isinstance(phi, AtomInG):
        return ["in-G", _term_sexp(phi.term, notion)]
    if isinstance(phi, AtomTr):
        return ["tr", _term_sexp(phi.stage, notion), _term_sexp(phi.code, notion),
                _term_sexp(phi.valuation, notion)]
    if isinstance(phi, Not):
        return ["not", _formula_sexp(phi.sub, notion)]
    if isinstance(phi, And):
        return ["and"] + [_formula_sexp(s, notion) for s in phi.subs]
    if isinstance(phi, Or):
        return ["or"] + [_formula_sexp(s, notion) for s in phi.subs]
    if isinstance(phi, Forall):
        return ["forall", list(phi.vars), _formula_sexp(phi.body, notion)]
    if isinstance(phi, Exists):
        return ["exists", list(phi.vars), _formula_sexp(phi.body, notion)]
    raise ForcelabError(f"unknown formula {type(phi).__name__}")


def formula_to_sexp(phi: Formula, notion: ForcingNotion | None = None) -> str:
    return sexpr.show(_formula_sexp(phi, notion))


# ---------------------------------------------------------------------------
# Every set is definable: the formulas θ_a(x), built by ∈-recursion, with
# distinct bound variables per depth so no renaming is ever needed.

_theta_cache: dict[tuple[HFSet, str, int], Formula] = {}


def theta_formula(a: HFSet, free_var: str = "x") -> Formula:
    """The constant-free formula defining a: θ_a(x) = ∀z (z∈x ⟺ ⋁_{u∈a} θ_u(z))."""
    return _theta(a, free_var, 0)


def _theta(a: HFSet, v: str, depth: int) -> Formula:
    key = (a, v, depth)
    got = _theta_cache.get(key)
    if got is None:
        z = f"z{depth}"
        disj = or_(_theta(u, z, depth + 1) for u in a.children)
        got = forall((z,), iff(atom_in(var(z), var(v)), disj))
        _theta_cache[key] = got
    return got


# ---------------------------------------------------------------------------
# Formulas as sets: an injective, constructor-tagged coding into HF sets,
# used wherever a formula must appear inside a name or a truth-atom argument.

_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789_ABCDEFGHIJKLMNOPQRSTUVWXYZ"
_CHAR_INDEX = {c: i for i, c in enumerate(_ALPHABET)}

_TAGS = {
    Var: 0, GroundConst: 1, NameConst: 2, PairTerm: 3,
    AtomEq: 4, AtomIn: 5, AtomInClass: 6, AtomInG: 7, AtomTr: 8,
    Not: 9, And: 10, Or: 11, Forall: 12, Exists: 13,
}


def _encode_str(s: str) -> HFSet:
    try:
        return hf_list(nat_encode(_CHAR_INDEX[c]) for c in s)
    except KeyError as e:
        raise EncodingError(f"identifier {s!r} uses characters outside {_ALPHABET!r}") from e


def _decode_str(x: HFSet) -> str | None:
    items = hf_unlist(x)
    if items is None:
        return None
    out = []
    for item in items:
        k = nat_decode(item)
        if k is None or k >= len(_ALPHABET):
            return None
        out.append(_ALPHABET[k])
    return "".join(out)


def _tagged(tag: int, payload: HFSet) -> HFSet:
    return hf_pair(nat_encode(tag), payload)


def encode_term(t: Term) -> HFSet:
    if isinstance(t, Var):
        return _tagged(0, _encode_str(t.name))
    if isinstance(t, GroundConst):
        return _tagged(1, t.value)
    if isinstance(t, NameConst):
        return _tagged(2, name_to_hf(t.name))
    if isinstance(t, PairTerm):
        return _tagged(3, hf_pair(encode_term(t.left), encode_term(t.right)))
    raise EncodingError(f"cannot encode term {type(t).__name__}")


def encode_formula(phi: Formula) -> HFSet:
    if isinstance(phi, AtomEq):
        return _tagged(4, hf_pair(encode_term(phi.left), encode_term(phi.right)))
    if isinstance(phi, AtomIn):
        return _tagged(5, hf_pair(encode_term(phi.left), encode_term(phi.right)))
    if isinstance(phi, AtomInClass):
        return _tagged(6, hf_pair(encode_term(phi.term), _encode_str(phi.ident)))
    if isinstance(phi, AtomInG):
        return _tagged(7, encode_term(phi.term))
    if isinstance(phi, AtomTr):
        return _tagged(8, hf_list([encode_term(phi.stage), encode_term(phi.code),
                                   encode_term(phi.valuation)]))
    if isinstance(phi, Not):
        return _tagged(9, encode_formula(phi.sub))
    if isinstance(phi, (And, Or)):
        return _tagged(_TAGS[type(phi)], hf_list(encode_formula(s) for s in phi.subs))
    if isinstance(phi, (Forall, Exists)):
        return _tagged(_TAGS[type(phi)],
                       hf_pair(hf_list(_encode_str(v) for v in phi.vars),
                               encode_formula(phi.body)))
    raise EncodingError(f"cannot encode formula {type(phi).__name__}")


def _decode_name(x: HFSet) -> PName | None:
    entries = []
    for child in x.children:
        p = hf_unpair(child)
        if p is None:
            return None
        sub = _decode_name(p[0])
        r = nat_decode(p[1])
        if sub is None or r is None:
            return None
        entries.append((sub, r))
    return name_make(entries)


def decode_term(x: HFSet) -> Term | None:
    p = hf_unpair(x)
    if p is None:
        return None
    tag, payload = nat_decode(p[0]), p[1]
    if tag == 0:
        s = _decode_str(payload)
        return var(s) if s else None
    if tag == 1:
        return const(payload)
    if tag == 2:
        n = _decode_name(payload)
        return name_const(n) if n is not None else None
    if tag == 3:
        q = hf_unpair(payload)
        if q is None:
            return None
        left, right = decode_term(q[0]), decode_term(q[1])
        return pair_term(left, right) if left is not None and right is not None else None
    return None


def decode_formula(x: HFSet) -> Formula | None:
    p = hf_unpair(x)
    if p is None:
        return None
    tag, payload = nat_decode(p[0]), p[1]
    if tag in (4, 5):
        q = hf_unpair(payload)
        if q is None:
            return None
        left, right = decode_term(q[0]), decode_term(q[1])
        if left is None or right is None:
            return None
        return atom_eq(left, right) if tag == 4 else atom_in(left, right)
    if tag == 6:
        q = hf_unpair(payload)
        if q is None:
            return None
        t, ident = decode_term(q[0]), _decode_str(q[1])
        return atom_in_class(t, ident) if t is not None and ident else None
    if tag == 7:
        t = decode_term(payload)
        return atom_in_g(t) if t is not None else None
    if tag == 8:
        items = hf_unlist(payload)
        if items is None or len(items) != 3:
            return None
        terms = [decode_term(i) for i in items]
        if any(t is None for t in terms):
            return None
        return atom_tr(*terms)
    if tag == 9:
        sub = decode_formula(payload)
        return not_(sub) if sub is not None else None
    if tag in (10, 11):
        items = hf_unlist(payload)
        if items is None:
            return None
        subs = [decode_formula(i) for i in items]
        if any(s is None for s in subs):
            return None
        return and_(subs) if tag == 10 else or_(subs)
    if tag in (12, 13):
        q = hf_unpair(payload)
        if q is None:
            return None
        var_items = hf_unlist(q[0])
        if var_items is None:
            return None
        vs = [_decode_str(v) for v in var_items]
        body = decode_formula(q[1])
        if any(v is None or not v for v in vs) or body is None:
            return None
        return forall(vs, body) if tag == 12 else exists(vs, body)
    return None


def encode_valuation(valuation: dict[str, HFSet]) -> HFSet:
    """Kuratowski-coded finite map from variable identifiers to sets."""
    return hf_make(hf_pair(_encode_str(v), x) for v, x in valuation.items())


def decode_valuation(x: HFSet) -> dict[str, HFSet] | None:
    out: dict[str, HFSet] = {}
    for child in x.children:
        p = hf_unpair(child)
        if p is None:
            return None
        v = _decode_str(p[0])
        if v is None or not v or v in out:
            return None
        out[v] = p[1]
    return out
