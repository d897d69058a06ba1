"""Forcing relations over finite notions.

The atomic relation is the unique solution of the membership/equality
recursion on pairs of names, ordered by the maximum of their ranks; it is
computed here by memoized recursion and, for cross-checks, re-derived as a
staged recursion instance.  On top of it sit the composite clauses for the
(finite) infinitary forcing language, the law audit, the reduction of
quantifier-free sentences to single atomic equalities, Boolean completions
with Boolean values, generic extensions with the forced-iff-true oracle,
and the name of a truth predicate.

Throughout, "dense below p" is the finite reading: every extension of p
has a further extension in the set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import etr as etr_mod
from . import truth as truth_mod
from .errors import (BudgetError, ClosureError, ForcelabError,
                     SeparativityError)
from .formulas import (And, AtomEq, AtomIn, AtomInClass, AtomInG, AtomTr,
                       Exists, Forall, Formula, NameConst, Not,
                       Or, PairTerm, Term, Var, and_, atom_eq, atom_in,
                       atom_in_class, atom_in_g, const, encode_formula,
                       exists, forall, formula_to_sexp, implies, name_const,
                       not_, or_, substitute)
from .hfset import EMPTY, HFSet, hf_make, nat_decode, nat_encode, hf_pair
from .names import (EMPTY_NAME, ClassName, PName, check_name, eval_class,
                    eval_name, g_dot, is_subname_closed, name_make,
                    name_to_hf, op_name)
from .poset import Filter, ForcingNotion, generic_filters, is_separative, minimal_classes

ATOMIC_BUDGET = 2_000_000
QUANTIFIER_BUDGET = 200_000
TRANSLATION_BUDGET = 100_000


@dataclass(frozen=True)
class AtomicStatement:
    kind: str  # "eq" | "in" | "sub" | "in_class"
    left: PName
    right: PName | None = None
    class_name: ClassName | None = None

    def __post_init__(self):
        if self.kind in ("eq", "in", "sub") and self.right is None:
            raise ForcelabError(f"{self.kind} statements need two names")
        if self.kind == "in_class" and self.class_name is None:
            raise ForcelabError("in_class statements need a class name")


class ForcingRelation:
    """The forcing relation of one notion over one subname-closed universe.

    Atomic decisions are memoized results of the defining recursion and are
    sound for any names, not only universe members; the universe bounds the
    quantifier clauses.  The canonical generic-filter class name is always
    registered under "G".
    """

    def __init__(self, notion: ForcingNotion, universe: Sequence[PName],
                 classes: Iterable[ClassName] = (), eager: bool = True,
                 atomic_budget: int = ATOMIC_BUDGET,
                 quantifier_budget: int = QUANTIFIER_BUDGET):
        self.notion = notion
        self.universe = tuple(sorted(set(universe), key=lambda n: n.key))
        if not is_subname_closed(self.universe):
            raise ClosureError("name universe must be subname-closed")
        for n in self.universe:
            if n.max_condition() >= len(notion):
                raise ForcelabError("universe name mentions a condition outside the notion")
        self.classes: dict[str, ClassName] = {"G": g_dot(notion)}
        for cls in classes:
            self.classes[cls.ident] = cls
        self.quantifier_budget = quantifier_budget
        self._atomic: dict = {}
        self._in_witness: dict = {}
        self._forces_memo: dict = {}
        if eager:
            if len(notion) * len(self.universe) ** 2 > atomic_budget:
                raise BudgetError(
                    f"{len(notion)} conditions x {len(self.universe)}^2 pairs "
                    f"exceeds budget {atomic_budget}")
            self.materialize()

    def register_class(self, cls: ClassName):
        self.classes[cls.ident] = cls
        self._forces_memo.clear()

    # -- the atomic recursion ------------------------------------------------

    def decide(self, kind: str, p: int, sigma: PName, tau: PName) -> bool:
        """p forces the atomic statement; the recursion is well-founded on
        the summed ranks of the pair, so plain memoization suffices."""
        key = (kind, p, sigma, tau)
        got = self._atomic.get(key)
        if got is not None:
            return got
        down = self.notion.down
        if kind == "in":
            out = self._dense_below(p, lambda q: self._witness_in(q, sigma, tau))
        elif kind == "sub":
            out = True
            for rho, r in sigma.entries:
                for q1 in down(p) & down(r):
                    if not any(self.decide("in", q, rho, tau) for q in down(q1)):
                        out = False
                        break
                if not out:
                    break
        elif kind == "eq":
            out = self.decide("sub", p, sigma, tau) and self.decide("sub", p, tau, sigma)
        else:
            raise ForcelabError(f"unknown atomic kind {kind!r}")
        self._atomic[key] = out
        return out

    def _witness_in(self, q: int, sigma: PName, tau: PName) -> bool:
        """Some entry ⟨ρ,r⟩ of τ has q ≤ r and q forcing σ = ρ."""
        key = (q, sigma, tau)
        got = self._in_witness.get(key)
        if got is None:
            got = any(self.notion.le(q, r) and self.decide("eq", q, sigma, rho)
                      for rho, r in tau.entries)
            self._in_witness[key] = got
        return got

    def _dense_below(self, p: int, pred: Callable[[int], bool]) -> bool:
        down = self.notion.down
        return all(any(pred(q) for q in down(q1)) for q1 in down(p))

    def materialize(self):
        for p in self.notion.conditions():
            for sigma in self.universe:
                for tau in self.universe:
                    for kind in ("in", "sub", "eq"):
                        self.decide(kind, p, sigma, tau)

    def table(self) -> dict:
        """The materialized entries over the universe, as (kind, p, σ, τ) → bool."""
        self.materialize()
        return {(k, p, s, t): v for (k, p, s, t), v in self._atomic.items()
                if s in set(self.universe) and t in set(self.universe)}

    def forces_atomic(self, p: int, stmt: AtomicStatement) -> bool:
        if stmt.kind == "in_class":
            return self._forces_class_atom(p, stmt.left, stmt.class_name)
        return self.decide(stmt.kind, p, stmt.left, stmt.right)

    def _forces_class_atom(self, p: int, sigma: PName, cls: ClassName) -> bool:
        def witness(q: int) -> bool:
            return any(self.notion.le(q, r) and self.decide("eq", q, sigma, tau)
                       for tau, r in cls.entries)

        return self._dense_below(p, witness)


def atomic_forcing(P: ForcingNotion, universe: Sequence[PName],
                   classes: Iterable[ClassName] = (), eager: bool = True,
                   atomic_budget: int = ATOMIC_BUDGET) -> ForcingRelation:
    """The forcing relation for atomic statements over a subname-closed universe."""
    return ForcingRelation(P, universe, classes, eager, atomic_budget)


# ---------------------------------------------------------------------------
# The composite clauses.

def collect_names(phi: Formula) -> set[PName]:
    out: set[PName] = set()

    def walk_term(t: Term):
        if isinstance(t, NameConst):
            out.add(t.name)
        elif isinstance(t, PairTerm):
            walk_term(t.left)
            walk_term(t.right)

    def walk(f: Formula):
        if isinstance(f, (AtomEq, AtomIn)):
            walk_term(f.left)
            walk_term(f.right)
        elif isinstance(f, AtomInClass):
            walk_term(f.term)
        elif isinstance(f, AtomInG):
            walk_term(f.term)
        elif isinstance(f, AtomTr):
            for t in (f.stage, f.code, f.valuation):
                walk_term(t)
        elif isinstance(f, Not):
            walk(f.sub)
        elif isinstance(f, (And, Or)):
            for s in f.subs:
                walk(s)
        elif isinstance(f, (Forall, Exists)):
            walk(f.body)

    walk(phi)
    return out


def _term_pname(t: Term) -> PName:
    if isinstance(t, NameConst):
        return t.name
    if isinstance(t, Var):
        raise ForcelabError("forcing a formula with free variables; substitute names first")
    raise ForcelabError(f"term {type(t).__name__} is not a name constant")


def forces(FR: ForcingRelation, p: int, phi: Formula, check_universe: bool = True) -> bool:
    """p forces the closed forcing-language formula, by the recursive clauses.

    Disjunction and existential quantification are evaluated by their
    densely-many-extensions characterization, which agrees with reading
    them as abbreviations (negated conjunction of negations); the
    agreement is exercised by the audit tests.
    """
    if phi.free:
        raise ForcelabError("only closed formulas are forced")
    if "ground" in phi.const_kinds:
        raise ForcelabError("forcing-language formulas use name constants, not ground constants")
    if check_universe:
        missing = collect_names(phi) - set(FR.universe)
        if missing:
            raise ForcelabError(
                f"formula mentions {len(missing)} name(s) outside the universe")
    return _forces(FR, p, phi)


def _forces(FR: ForcingRelation, p: int, phi: Formula) -> bool:
    key = (p, phi)
    got = FR._forces_memo.get(key)
    if got is not None:
        return got
    out = _forces_raw(FR, p, phi)
    FR._forces_memo[key] = out
    return out


def _forces_raw(FR: ForcingRelation, p: int, phi: Formula) -> bool:
    down = FR.notion.down
    if isinstance(phi, AtomEq):
        return FR.decide("eq", p, _term_pname(phi.left), _term_pname(phi.right))
    if isinstance(phi, AtomIn):
        return FR.decide("in", p, _term_pname(phi.left), _term_pname(phi.right))
    if isinstance(phi, AtomInClass):
        try:
            cls = FR.classes[phi.ident]
        except KeyError:
            raise ForcelabError(f"no class name registered as {phi.ident!r}") from None
        return FR._forces_class_atom(p, _term_pname(phi.term), cls)
    if isinstance(phi, AtomInG):
        return FR._forces_class_atom(p, _term_pname(phi.term), FR.classes["G"])
    if isinstance(phi, AtomTr):
        raise ForcelabError("iterated-truth atoms are not part of the forcing language")
    if isinstance(phi, Not):
        return not any(_forces(FR, q, phi.sub) for q in down(p))
    if isinstance(phi, And):
        return all(_forces(FR, p, s) for s in phi.subs)
    if isinstance(phi, Or):
        return FR._dense_below(p, lambda q: any(_forces(FR, q, s) for s in phi.subs))
    if isinstance(phi, (Forall, Exists)):
        k = len(phi.vars)
        if len(FR.universe) ** k > FR.quantifier_budget:
            raise BudgetError(f"quantifier block over {len(FR.universe)}^{k} names")
        assignments = [dict(zip(phi.vars, (name_const(n) for n in values)))
                       for values in itertools.product(FR.universe, repeat=k)]
        if isinstance(phi, Forall):
            return all(_forces(FR, p, substitute(phi.body, a)) for a in assignments)
        return FR._dense_below(
            p, lambda q: any(_forces(FR, q, substitute(phi.body, a)) for a in assignments))
    raise ForcelabError(f"unknown formula node {type(phi).__name__}")


# ---------------------------------------------------------------------------
# The law audit.

@dataclass
class AuditReport:
    laws: dict[str, tuple[bool, object]] = field(default_factory=dict)

    def record(self, law: str, ok: bool, counterexample=None):
        if law not in self.laws or self.laws[law][0]:
            self.laws[law] = (ok, counterexample)

    @property
    def ok(self) -> bool:
        return all(ok for ok, _ in self.laws.values())

    def failures(self) -> dict:
        return {law: cx for law, (ok, cx) in self.laws.items() if not ok}


def _atomic_formulas(FR: ForcingRelation, cap: int) -> list[Formula]:
    names = FR.universe[:max(2, min(len(FR.universe), 6))]
    pool = []
    for s in names:
        for t in names:
            pool.append(atom_eq(name_const(s), name_const(t)))
            pool.append(atom_in(name_const(s), name_const(t)))
    return pool[:cap]


def audit_forcing_relation(FR: ForcingRelation, triple_cap: int = 4000,
                           pool: Sequence[Formula] | None = None) -> AuditReport:
    """Check the laws a forcing relation must satisfy, over the universe.

    Covers downward closure, the density rule, modus ponens, the equality
    axioms and dense decidedness, reporting a counterexample per law.
    """
    FR.materialize()
    P = FR.notion
    N = FR.universe
    report = AuditReport()

    for law in ("downward-closure", "density", "modus-ponens", "eq-reflexive",
                "eq-symmetric", "eq-transitive", "eq-congruence", "dense-decided"):
        report.record(law, True)

    for kind in ("in", "sub", "eq"):
        for sigma in N:
            for tau in N:
                forced_at = [p for p in P.conditions() if FR.decide(kind, p, sigma, tau)]
                for p in forced_at:
                    for q in P.down(p):
                        if not FR.decide(kind, q, sigma, tau):
                            report.record("downward-closure", False, (kind, p, q, sigma, tau))
                for p in P.conditions():
                    dense = all(any(q in forced_at for q in P.down(q1)) for q1 in P.down(p))
                    if dense and p not in forced_at:
                        report.record("density", False, (kind, p, sigma, tau))

    audit_pool = list(pool) if pool is not None else _atomic_formulas(FR, 24)
    for phi, psi in itertools.islice(itertools.product(audit_pool, repeat=2), triple_cap):
        for p in P.conditions():
            if _forces(FR, p, phi) and _forces(FR, p, implies(phi, psi)) \
                    and not _forces(FR, p, psi):
                report.record("modus-ponens", False, (p, phi, psi))

    for sigma in N:
        if not FR.decide("eq", P.one, sigma, sigma):
            report.record("eq-reflexive", False, sigma)
    for sigma, tau in itertools.islice(itertools.product(N, repeat=2), triple_cap):
        for p in P.conditions():
            if FR.decide("eq", p, sigma, tau) != FR.decide("eq", p, tau, sigma):
                report.record("eq-symmetric", False, (p, sigma, tau))
    for sigma, tau, rho in itertools.islice(itertools.product(N, repeat=3), triple_cap):
        for p in P.conditions():
            if FR.decide("eq", p, sigma, tau) and FR.decide("eq", p, tau, rho) \
                    and not FR.decide("eq", p, sigma, rho):
                report.record("eq-transitive", False, (p, sigma, tau, rho))
            if FR.decide("eq", p, sigma, tau) and FR.decide("in", p, rho, sigma) \
                    and not FR.decide("in", p, rho, tau):
                report.record("eq-congruence", False, (p, sigma, tau, rho))

    for phi in audit_pool:
        decided = [q for q in P.conditions()
                   if _forces(FR, q, phi) or _forces(FR, q, not_(phi))]
        if not all(any(q in decided for q in P.down(q1)) for q1 in P.conditions()):
            report.record("dense-decided", False, phi)

    return report


# ---------------------------------------------------------------------------
# Reduction of quantifier-free infinitary sentences to atomic equalities.

class _SizeGuard:
    def __init__(self, budget: int):
        self.budget = budget
        self.count = 0

    def tick(self, n: int = 1):
        self.count += n
        if self.count > self.budget:
            raise BudgetError(f"translation exceeded {self.budget} name constructions")


def _check_value(name: PName) -> HFSet | None:
    """The set x with name = x̌, or None if the name is not a check name."""
    values = []
    for rho, r in name.entries:
        if r != 0:
            return None
        v = _check_value(rho)
        if v is None:
            return None
        values.append(v)
    return hf_make(values)


def _condition_index(name: PName, P: ForcingNotion) -> int | None:
    v = _check_value(name)
    if v is None:
        return None
    i = nat_decode(v)
    return i if i is not None and i < len(P) else None


def star_translate(phi: Formula, P: ForcingNotion,
                   budget: int = TRANSLATION_BUDGET) -> tuple[PName, PName]:
    """Compile a closed, quantifier-free sentence to one atomic equality.

    Five passes, in order: eliminate generic-filter atoms at non-check
    names; push negations to the atoms; eliminate negated atoms by the
    rank-descending rewrites; eliminate the remaining positive atoms into
    name equalities; and collapse conjunctions/disjunctions into single
    equalities (disjunction via the redundancy construction).  A condition
    forces the sentence iff it forces the returned equality.
    """
    if phi.free:
        raise ForcelabError("only closed sentences translate")
    if "ground" in phi.const_kinds:
        raise ForcelabError("translation expects the forcing language")
    guard = _SizeGuard(budget)

    def no_quantifiers(f: Formula):
        if isinstance(f, (Forall, Exists)):
            raise ForcelabError("translation is for quantifier-free sentences")
        if isinstance(f, (AtomInClass, AtomTr)):
            raise ForcelabError("translation covers =, ∈ and generic-filter atoms only")
        if isinstance(f, Not):
            no_quantifiers(f.sub)
        if isinstance(f, (And, Or)):
            for s in f.subs:
                no_quantifiers(s)

    no_quantifiers(phi)
    step1 = _eliminate_g(phi, P)
    step2 = _nnf(step1, True)
    step3 = _positive(step2, guard)
    return _reduce(step3, guard)


def _g_atom(i: int) -> Formula:
    return atom_in_g(name_const(check_name(nat_encode(i))))


def _eliminate_g(phi: Formula, P: ForcingNotion) -> Formula:
    if isinstance(phi, AtomInG):
        sigma = _term_pname(phi.term)
        if _condition_index(sigma, P) is not None:
            return phi
        return or_(and_([_g_atom(i), atom_eq(name_const(sigma),
                                             name_const(check_name(nat_encode(i))))])
                   for i in P.conditions())
    if isinstance(phi, Not):
        return not_(_eliminate_g(phi.sub, P))
    if isinstance(phi, And):
        return and_(_eliminate_g(s, P) for s in phi.subs)
    if isinstance(phi, Or):
        return or_(_eliminate_g(s, P) for s in phi.subs)
    return phi


def _nnf(phi: Formula, positive: bool) -> Formula:
    if isinstance(phi, Not):
        return _nnf(phi.sub, not positive)
    if isinstance(phi, And):
        subs = (_nnf(s, positive) for s in phi.subs)
        return and_(subs) if positive else or_(subs)
    if isinstance(phi, Or):
        subs = (_nnf(s, positive) for s in phi.subs)
        return or_(subs) if positive else and_(subs)
    return phi if positive else not_(phi)


def _positive(phi: Formula, guard: _SizeGuard) -> Formula:
    """Remove negated equality/membership atoms; negated filter atoms stay."""
    if isinstance(phi, And):
        return and_(_positive(s, guard) for s in phi.subs)
    if isinstance(phi, Or):
        return or_(_positive(s, guard) for s in phi.subs)
    if isinstance(phi, Not):
        sub = phi.sub
        if isinstance(sub, AtomEq):
            return _not_eq(_term_pname(sub.left), _term_pname(sub.right), guard)
        if isinstance(sub, AtomIn):
            return _not_in(_term_pname(sub.left), _term_pname(sub.right), guard)
        if isinstance(sub, AtomInG):
            return phi
        raise ForcelabError("negation left above a non-atom after NNF")
    return phi


# The rewrites terminate along the measure (summed ranks, then a tag putting
# inequality above non-subset): inequality keeps the summed ranks but lowers
# the tag, and the other two steps strictly lower an entry's rank.  Each call
# checks its measure against the caller's.

def _measure_drops(bound, mu):
    if bound is not None and not mu < bound:
        raise ForcelabError(f"rewrite measure failed to decrease: {bound} -> {mu}")


def _not_eq(sigma: PName, tau: PName, guard: _SizeGuard, bound=None) -> Formula:
    mu = (sigma.rank + tau.rank, 1)
    _measure_drops(bound, mu)
    guard.tick()
    return or_([_not_sub(sigma, tau, guard, mu), _not_sub(tau, sigma, guard, mu)])


def _not_sub(sigma: PName, tau: PName, guard: _SizeGuard, bound=None) -> Formula:
    mu = (sigma.rank + tau.rank, 0)
    _measure_drops(bound, mu)
    guard.tick()
    return or_(and_([_g_atom(r), _not_in(rho, tau, guard, mu)]) for rho, r in sigma.entries)


def _not_in(sigma: PName, tau: PName, guard: _SizeGuard, bound=None) -> Formula:
    mu = (sigma.rank + tau.rank, 0)
    _measure_drops(bound, mu)
    guard.tick()
    return and_(or_([not_(_g_atom(r)), _not_eq(sigma, rho, guard, mu)]) for rho, r in tau.entries)


def _union_entry(tau: PName, sigma: PName) -> PName:
    return name_make(tau.entries + ((sigma, 0),))


def _reduce(phi: Formula, guard: _SizeGuard) -> tuple[PName, PName]:
    guard.tick()
    if isinstance(phi, AtomEq):
        return _term_pname(phi.left), _term_pname(phi.right)
    if isinstance(phi, AtomIn):
        sigma, tau = _term_pname(phi.left), _term_pname(phi.right)
        return tau, _union_entry(tau, sigma)
    if isinstance(phi, AtomInG):
        # the filter atom's argument is a check name of a condition ordinal
        v = _check_value(_term_pname(phi.term))
        i = nat_decode(v) if v is not None else None
        if i is None:
            raise ForcelabError("unexpanded filter atom survived the first pass")
        return name_make([(EMPTY_NAME, i)]), name_make([(EMPTY_NAME, 0)])
    if isinstance(phi, Not) and isinstance(phi.sub, AtomInG):
        v = _check_value(_term_pname(phi.sub.term))
        i = nat_decode(v) if v is not None else None
        if i is None:
            raise ForcelabError("unexpanded filter atom survived the first pass")
        return name_make([(EMPTY_NAME, i)]), EMPTY_NAME
    if isinstance(phi, And):
        parts = [_reduce(s, guard) for s in phi.subs]
        guard.tick(len(parts))
        left = name_make((op_name(check_name(nat_encode(i)), a), 0)
                         for i, (a, _) in enumerate(parts))
        right = name_make((op_name(check_name(nat_encode(i)), b), 0)
                          for i, (_, b) in enumerate(parts))
        return left, right
    if isinstance(phi, Or):
        parts = [_reduce(s, guard) for s in phi.subs]
        guard.tick(2 * len(parts) + 2)
        a_entries = [(op_name(check_name(nat_encode(i)), a), 0)
                     for i, (a, _) in enumerate(parts)]
        b_entries = [(op_name(check_name(nat_encode(i)), b), 0)
                     for i, (_, b) in enumerate(parts)]
        u = name_make(a_entries + b_entries)
        u_j = [name_make(a_entries + [e for k, e in enumerate(b_entries) if k != j])
               for j in range(len(parts))]
        left = name_make((uj, 0) for uj in u_j)
        right = name_make([(uj, 0) for uj in u_j] + [(u, 0)])
        return left, right
    raise ForcelabError(f"cannot reduce {type(phi).__name__}")


# ---------------------------------------------------------------------------
# Boolean completions: the regular-open algebra of the preorder.

class BooleanAlgebra:
    """The regular-open downsets of a finite separative preorder.

    A downset U is regular exactly when it contains every condition below
    which it is dense; equivalently, U is determined by which classes of
    minimal conditions it absorbs.
    """

    def __init__(self, P: ForcingNotion):
        self.notion = P
        classes = minimal_classes(P)
        self._classes = classes
        below = []
        for p in P.conditions():
            below.append(frozenset(k for k, cls in enumerate(classes)
                                   if cls & P.down(p)))
        self._below = below
        self.elements = []
        for mask in range(1 << len(classes)):
            chosen = frozenset(k for k in range(len(classes)) if mask >> k & 1)
            self.elements.append(frozenset(
                p for p in P.conditions() if below[p] <= chosen))
        self.elements = sorted(set(self.elements), key=lambda u: (len(u), sorted(u)))
        self._element_set = frozenset(self.elements)
        self.zero = frozenset()
        self.one = frozenset(P.conditions())

    def __len__(self) -> int:
        return len(self.elements)

    def is_element(self, U: frozenset[int]) -> bool:
        return U in self._element_set

    def regularize(self, U: Iterable[int]) -> frozenset[int]:
        """Those p below which U is dense; the regular-open closure of a downset."""
        dset = set(U)
        P = self.notion
        return frozenset(p for p in P.conditions()
                         if all(dset & P.down(q) for q in P.down(p)))

    def meet(self, a: frozenset, b: frozenset) -> frozenset:
        return a & b

    def join(self, a: frozenset, b: frozenset) -> frozenset:
        return self.regularize(a | b)

    def neg(self, a: frozenset) -> frozenset:
        P = self.notion
        return frozenset(p for p in P.conditions() if not (P.down(p) & a))

    def le(self, a: frozenset, b: frozenset) -> bool:
        return a <= b

    def join_many(self, items: Iterable[frozenset]) -> frozenset:
        out: set[int] = set()
        for u in items:
            out |= u
        return self.regularize(out)

    def meet_many(self, items: Iterable[frozenset]) -> frozenset:
        out = set(self.one)
        for u in items:
            out &= u
        return frozenset(out)


@dataclass(frozen=True)
class BooleanCompletion:
    algebra: BooleanAlgebra
    _embed: tuple[frozenset, ...]

    def embed(self, p: int) -> frozenset:
        return self._embed[p]


def boolean_completion(P: ForcingNotion) -> BooleanCompletion:
    """The regular-open completion with its dense order embedding.

    Raises when the notion is not separative; separativity is exactly what
    makes the embedding injective up to equivalence.
    """
    ok, cx = is_separative(P)
    if not ok:
        raise SeparativityError(
            f"notion is not separative: no extension of {P.elements[cx[0]]} "
            f"is incompatible with {P.elements[cx[1]]}", cx)
    B = BooleanAlgebra(P)
    embed = tuple(B.regularize(P.down(p)) for p in P.conditions())
    for p, U in enumerate(embed):
        if not B.is_element(U):
            raise ForcelabError(f"embedding image of {P.elements[p]} is not regular-open")
    return BooleanCompletion(B, embed)


def audit_boolean_algebra(B: BooleanAlgebra, pair_cap: int = 40000) -> AuditReport:
    """Boolean-algebra laws plus regularity and, on small notions, completeness
    of the element enumeration among all regular-open downsets."""
    report = AuditReport()
    P = B.notion
    for law in ("regular", "complement", "de-morgan", "distributive", "closure",
                "enumeration-complete"):
        report.record(law, True)

    for U in B.elements:
        if any(q not in U for p in U for q in P.down(p)) or B.regularize(U) != U:
            report.record("regular", False, sorted(U))
    for a in B.elements:
        if B.join(a, B.neg(a)) != B.one or B.meet(a, B.neg(a)) != B.zero:
            report.record("complement", False, sorted(a))
    pairs = itertools.islice(itertools.product(B.elements, repeat=2), pair_cap)
    for a, b in pairs:
        if B.neg(B.join(a, b)) != B.meet(B.neg(a), B.neg(b)):
            report.record("de-morgan", False, (sorted(a), sorted(b)))
        if not (B.is_element(B.join(a, b)) and B.is_element(B.meet(a, b))
                and B.is_element(B.neg(a))):
            report.record("closure", False, (sorted(a), sorted(b)))
    triples = itertools.islice(itertools.product(B.elements, repeat=3), pair_cap)
    for a, b, c in triples:
        if B.meet(a, B.join(b, c)) != B.join(B.meet(a, b), B.meet(a, c)):
            report.record("distributive", False, (sorted(a), sorted(b), sorted(c)))

    if len(P) <= 12:
        for mask in range(1 << len(P)):
            U = frozenset(p for p in P.conditions() if mask >> p & 1)
            down_closed = all(q in U for p in U for q in P.down(p))
            if down_closed and B.regularize(U) == U and not B.is_element(U):
                report.record("enumeration-complete", False, sorted(U))
    return report


def lindenbaum_value(FR: ForcingRelation, phi: Formula) -> frozenset[int]:
    """The conditions forcing the sentence; regular-open by the forcing laws."""
    return frozenset(p for p in FR.notion.conditions()
                     if forces(FR, p, phi, check_universe=False))


class BooleanValues:
    """Boolean values of atomic statements, by the recursion on names."""

    def __init__(self, completion: BooleanCompletion):
        self.completion = completion
        self._memo: dict = {}

    def value(self, kind: str, sigma: PName, tau: PName) -> frozenset:
        key = (kind, sigma, tau)
        got = self._memo.get(key)
        if got is not None:
            return got
        B = self.completion.algebra
        i = self.completion.embed
        if kind == "in":
            out = B.join_many(B.meet(self.value("eq", sigma, rho), i(r))
                              for rho, r in tau.entries)
        elif kind == "sub":
            out = B.meet_many(B.join(B.neg(i(r)), self.value("in", rho, tau))
                              for rho, r in sigma.entries)
        elif kind == "eq":
            out = B.meet(self.value("sub", sigma, tau), self.value("sub", tau, sigma))
        else:
            raise ForcelabError(f"unknown atomic kind {kind!r}")
        self._memo[key] = out
        return out

    def derived_forces(self, p: int, kind: str, sigma: PName, tau: PName) -> bool:
        B = self.completion.algebra
        return B.le(self.completion.embed(p), self.value(kind, sigma, tau))


def boolean_values(completion: BooleanCompletion) -> BooleanValues:
    return BooleanValues(completion)


# ---------------------------------------------------------------------------
# Generic extensions and the forced-iff-true oracle.

@dataclass
class GenericExtension:
    relation: ForcingRelation
    filter: Filter
    blocks: tuple[frozenset[PName], ...]       # =_G classes over the universe
    representative: dict[PName, PName]
    membership: frozenset[tuple[PName, PName]]  # on representatives
    class_extensions: dict[str, frozenset[PName]]  # representatives satisfying Γ
    evaluation: dict[PName, HFSet]
    structure: "truth_mod.FiniteStructure"

    def block_of(self, name: PName) -> PName:
        return self.representative[name]


def extension(FR: ForcingRelation, G: Filter,
              class_names: Iterable[ClassName] = ()) -> GenericExtension:
    """Quotient the universe by forced equality along the filter, and verify
    it is isomorphic to the direct-evaluation structure."""
    for cls in class_names:
        FR.register_class(cls)
    N = FR.universe

    def eq(a: PName, b: PName) -> bool:
        return any(FR.decide("eq", p, a, b) for p in G.members)

    def mem(a: PName, b: PName) -> bool:
        return any(FR.decide("in", p, a, b) for p in G.members)

    for a in N:
        if not eq(a, a):
            raise ForcelabError("forced equality is not reflexive; corrupted table")
    for a, b, c in itertools.product(N, repeat=3):
        if eq(a, b) and eq(b, c) and not eq(a, c):
            raise ForcelabError("forced equality is not transitive; corrupted table")
    for a, b, c in itertools.product(N, repeat=3):
        if eq(a, b) and (mem(c, a) != mem(c, b) or mem(a, c) != mem(b, c)):
            raise ForcelabError("forced equality is not a membership congruence")

    blocks: list[list[PName]] = []
    rep: dict[PName, PName] = {}
    for a in N:
        for block in blocks:
            if eq(a, block[0]):
                block.append(a)
                break
        else:
            blocks.append([a])
    block_tuples = tuple(frozenset(b) for b in blocks)
    for block in block_tuples:
        r = min(block, key=lambda n: n.key)
        for a in block:
            rep[a] = r

    reps = sorted(set(rep.values()), key=lambda n: n.key)
    membership = frozenset((a, b) for a in reps for b in reps if mem(a, b))

    class_ext: dict[str, frozenset[PName]] = {}
    for ident, cls in FR.classes.items():
        class_ext[ident] = frozenset(
            a for a in reps if any(FR._forces_class_atom(p, a, cls) for p in G.members))

    memo: dict = {}
    evaluation = {a: eval_name(a, G, memo) for a in N}

    # Quotient vs direct evaluation: same identifications, same membership,
    # same class extensions.
    for a, b in itertools.product(N, repeat=2):
        if eq(a, b) != (evaluation[a] is evaluation[b]):
            raise ForcelabError(
                "forced equality disagrees with direct evaluation "
                f"at {a!r}, {b!r}")
        if mem(a, b) != (evaluation[a] in evaluation[b]):
            raise ForcelabError("forced membership disagrees with direct evaluation")
    domain = sorted({evaluation[a] for a in N}, key=lambda x: x.key)
    predicates = {}
    for ident, cls in FR.classes.items():
        direct = eval_class(cls, G)
        quotient_values = {evaluation[a] for a in class_ext[ident]}
        if quotient_values != direct & set(domain):
            raise ForcelabError(f"class {ident!r} extension disagrees with evaluation")
        predicates[ident] = direct & set(domain)
    structure = truth_mod.FiniteStructure(domain, predicates)

    return GenericExtension(FR, G, block_tuples, rep, membership, class_ext,
                            evaluation, structure)


def ground_formula(phi: Formula, ext: GenericExtension) -> Formula:
    """Replace name constants by their evaluated sets and filter atoms by the
    generic-filter predicate, yielding a truth-language formula."""
    def term(t: Term) -> Term:
        if isinstance(t, NameConst):
            return const(ext.evaluation[t.name])
        if isinstance(t, PairTerm):
            raise ForcelabError("unfilled pair slot in a closed formula")
        return t

    def walk(f: Formula) -> Formula:
        if isinstance(f, AtomEq):
            return atom_eq(term(f.left), term(f.right))
        if isinstance(f, AtomIn):
            return atom_in(term(f.left), term(f.right))
        if isinstance(f, AtomInClass):
            return atom_in_class(term(f.term), f.ident)
        if isinstance(f, AtomInG):
            return atom_in_class(term(f.term), "G")
        if isinstance(f, Not):
            return not_(walk(f.sub))
        if isinstance(f, And):
            return and_(walk(s) for s in f.subs)
        if isinstance(f, Or):
            return or_(walk(s) for s in f.subs)
        if isinstance(f, Forall):
            return forall(f.vars, walk(f.body))
        if isinstance(f, Exists):
            return exists(f.vars, walk(f.body))
        raise ForcelabError(f"cannot ground {type(f).__name__}")

    return walk(phi)


def truth_lemma_check(FR: ForcingRelation, phis: Formula | Iterable[Formula],
                      class_names: Iterable[ClassName] = ()):
    """Forced iff true, over every generic filter of the notion.

    Truth is Tarskian satisfaction in the direct-evaluation structure (the
    quotient is verified isomorphic when the extension is built), with
    quantifiers ranging over the evaluations of the universe.
    """
    if isinstance(phis, Formula):
        phis = [phis]
    phis = list(phis)
    for cls in class_names:
        FR.register_class(cls)
    for G in generic_filters(FR.notion):
        ext = extension(FR, G)
        for phi in phis:
            truth = truth_mod.eval_formula(ext.structure, ground_formula(phi, ext), {})
            forced = any(_forces(FR, p, phi) for p in G.members)
            if truth != forced:
                return False, (G, phi)
    return True, None


# ---------------------------------------------------------------------------
# The truth-predicate name.

@dataclass
class TruthName:
    relation: ForcingRelation
    pool: tuple[Formula, ...]
    tdot: ClassName
    ok: bool
    failures: list


def _pool_entry_name(phi: Formula) -> PName:
    return op_name(check_name(encode_formula(phi)), check_name(EMPTY))


def truth_name(FR: ForcingRelation, pool: Sequence[Formula]) -> TruthName:
    """The class name collecting ⟨coded sentence, condition⟩ pairs that are
    forced, verified to name a truth predicate for the pool in every
    generic extension, with the derived relation agreeing with forcing."""
    from .formulas import subformulas

    pool = tuple(sorted(set(pool), key=lambda f: (f.rank, formula_to_sexp(f))))
    for phi in pool:
        if phi.free:
            raise ForcelabError("truth-name pools contain closed formulas")
    closed_subs = {s for phi in pool for s in subformulas(phi) if not s.free}
    if closed_subs - set(pool):
        raise ClosureError("truth-name pool must contain every closed subformula")

    entries = []
    for phi in pool:
        entry = _pool_entry_name(phi)
        for p in FR.notion.conditions():
            if forces(FR, p, phi, check_universe=False):
                entries.append((entry, p))
    tdot = ClassName.make("T", entries)
    FR.register_class(tdot)

    failures = []

    def star_forces(p: int, phi: Formula) -> bool:
        atom = atom_in_class(name_const(_pool_entry_name(phi)), "T")
        return forces(FR, p, atom, check_universe=False)

    for phi in pool:
        for p in FR.notion.conditions():
            if star_forces(p, phi) != forces(FR, p, phi, check_universe=False):
                failures.append(("derived-vs-forcing", p, phi))

    for G in generic_filters(FR.notion):
        ext = extension(FR, G)
        t_values = eval_class(tdot, G)

        def declared(phi: Formula) -> bool:
            code = hf_pair(encode_formula(phi), EMPTY)
            return code in t_values

        for phi in pool:
            true = truth_mod.eval_formula(ext.structure, ground_formula(phi, ext), {})
            if declared(phi) != true:
                failures.append(("extension-truth", G, phi))
            if isinstance(phi, Not) and phi.sub in pool:
                if declared(phi) == declared(phi.sub):
                    failures.append(("negation-clause", G, phi))
            if isinstance(phi, And) and all(s in pool for s in phi.subs):
                if declared(phi) != all(declared(s) for s in phi.subs):
                    failures.append(("conjunction-clause", G, phi))
            if isinstance(phi, Forall) and len(phi.vars) == 1:
                insts = [substitute(phi.body, {phi.vars[0]: name_const(n)})
                         for n in FR.universe]
                if all(i in pool for i in insts):
                    if declared(phi) != all(declared(i) for i in insts):
                        failures.append(("quantifier-clause", G, phi))

    return TruthName(FR, pool, tdot, not failures, failures)


# ---------------------------------------------------------------------------
# The atomic relation re-derived as a staged recursion instance.

def atomic_recursion_instance(P: ForcingNotion, universe: Sequence[PName]):
    """The forcing recursion as an explicit instance: pairs of names staged by
    (max rank, rank pair), with the subset clause unfolded into membership."""
    N = tuple(sorted(set(universe), key=lambda n: n.key))
    if not is_subname_closed(N):
        raise ClosureError("name universe must be subname-closed")
    stages = sorted({(max(s.rank, t.rank), s.rank, t.rank) for s in N for t in N})
    stage_index = {st: i for i, st in enumerate(stages)}

    def stage_of(s: PName, t: PName) -> int:
        return stage_index[(max(s.rank, t.rank), s.rank, t.rank)]

    codec: dict[HFSet, tuple[int, str, PName, PName]] = {}
    for p in P.conditions():
        for kind_id, kind in ((0, "in"), (1, "eq")):
            for s in N:
                for t in N:
                    enc = hf_pair(nat_encode(p),
                                  hf_pair(nat_encode(kind_id),
                                          hf_pair(name_to_hf(s), name_to_hf(t))))
                    codec[enc] = (p, kind, s, t)

    enc_of = {v: k for k, v in codec.items()}

    def holds(view, p: int, kind: str, s: PName, t: PName) -> bool:
        return view(stage_of(s, t), enc_of[(p, "in" if kind == "in" else "eq", s, t)])

    def step(x: HFSet, alpha: int, view, _param) -> bool:
        p, kind, sigma, tau = codec[x]
        if stage_of(sigma, tau) != alpha:
            return False
        down = P.down
        if kind == "in":
            def witness(q: int) -> bool:
                return any(P.le(q, r) and holds(view, q, "eq", sigma, rho)
                           for rho, r in tau.entries)

            return all(any(witness(q) for q in down(q1)) for q1 in down(p))
        # equality, with both subset directions unfolded into membership
        for a, b in ((sigma, tau), (tau, sigma)):
            for rho, r in a.entries:
                for q1 in down(p) & down(r):
                    if not any(holds(view, q, "in", rho, b) for q in down(q1)):
                        return False
        return True

    inst = etr_mod.RecursionInstance(
        length=len(stages), domain=tuple(sorted(codec, key=lambda e: e.key)),
        step=step, label="atomic-forcing")
    return inst, codec, stage_of


def compare_atomic_table(FR: ForcingRelation, solution, codec) -> bool:
    """Bit-identical agreement between the staged solution and the direct table."""
    for enc, (p, kind, sigma, tau) in codec.items():
        staged = any(enc in sl for sl in solution.slices)
        if staged != FR.decide(kind, p, sigma, tau):
            return False
    return True
