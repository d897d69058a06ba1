"""Truth predicates over finite structures.

Plain and staged (iterated) Tarskian truth, the clock-collapse translation
that turns first-order statements about a stage into quantifier-free
infinitary statements in the forcing language of the augmented collapse,
the truth predicate derived from that forcing relation, and the stage
translation that compiles iterated-truth atoms away.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from . import etr as etr_mod
from .errors import BudgetError, ClosureError, ForcelabError
from .formulas import (And, AtomEq, AtomIn, AtomInClass, AtomInG, AtomTr,
                       Exists, Forall, Formula, GroundConst, Not, Or, PairTerm,
                       Term, Var, and_, atom_eq, atom_in, atom_in_class,
                       atom_tr, decode_formula, decode_valuation,
                       encode_formula, encode_valuation, exists, forall, formula_to_sexp,
                       iff, name_const, not_, or_, pair_term, subformula_closure,
                       substitute, theta_formula, var)
from .hfset import HFSet, hf_pair, nat_decode, nat_encode, transitive_closure
from .names import PName, check_name
from .poset import CollapseNotion

EVAL_BUDGET = 5_000_000


class FiniteStructure:
    """A finite ∈-structure with named unary predicates.

    The membership relation is the real one on the HF sets of the domain.
    An optional truth backing makes iterated-truth atoms evaluable.
    """

    def __init__(self, domain: Iterable[HFSet],
                 predicates: dict[str, Iterable[HFSet]] | None = None,
                 tr_backing: Callable[[int, Formula, dict[str, HFSet]], bool] | None = None):
        self.domain = tuple(sorted(set(domain), key=lambda x: x.key))
        self._domain_set = frozenset(self.domain)
        self.predicates = {k: frozenset(v) for k, v in (predicates or {}).items()}
        for ident, pred in self.predicates.items():
            if not pred <= self._domain_set:
                raise ForcelabError(f"predicate {ident!r} is not a subset of the domain")
        self.tr_backing = tr_backing
        self._cache: dict = {}

    def __contains__(self, x: HFSet) -> bool:
        return x in self._domain_set

    def with_backing(self, backing) -> "FiniteStructure":
        return FiniteStructure(self.domain, self.predicates, backing)

    def __repr__(self) -> str:
        return f"FiniteStructure(|domain|={len(self.domain)}, predicates={sorted(self.predicates)})"


Valuation = "dict[str, HFSet]"


def _val_key(phi: Formula, v: dict[str, HFSet]):
    return tuple(sorted((x, v[x]) for x in phi.free))


def _term_value(t: Term, M: FiniteStructure, v: dict[str, HFSet]) -> HFSet:
    if isinstance(t, Var):
        try:
            return v[t.name]
        except KeyError:
            raise ForcelabError(f"valuation misses variable {t.name!r}") from None
    if isinstance(t, GroundConst):
        if t.value not in M:
            raise ForcelabError(f"constant {t.value!r} lies outside the domain")
        return t.value
    raise ForcelabError("forcing-language terms cannot be evaluated over a structure")


def eval_formula(M: FiniteStructure, phi: Formula, valuation: dict[str, HFSet] | None = None) -> bool:
    """Tarskian satisfaction, with quantifier blocks ranging over the domain."""
    v = valuation or {}
    missing = phi.free - set(v)
    if missing:
        raise ForcelabError(f"free variables {sorted(missing)} not covered by the valuation")
    return _eval(M, phi, v)


def _eval(M: FiniteStructure, phi: Formula, v: dict[str, HFSet]) -> bool:
    # Atoms are cheaper to recompute than to memoize.
    if phi.rank == 0:
        return _eval_atom(M, phi, v)
    key = (phi, tuple(v[x] for x in phi.free_sorted))
    cache = M._cache
    got = cache.get(key)
    if got is not None:
        return got
    out = _eval_raw(M, phi, v)
    cache[key] = out
    return out


def _eval_atom(M: FiniteStructure, phi: Formula, v) -> bool:
    if isinstance(phi, AtomIn):
        return _term_value(phi.left, M, v) in _term_value(phi.right, M, v)
    if isinstance(phi, AtomEq):
        return _term_value(phi.left, M, v) is _term_value(phi.right, M, v)
    if isinstance(phi, AtomInClass):
        try:
            pred = M.predicates[phi.ident]
        except KeyError:
            raise ForcelabError(f"structure has no predicate {phi.ident!r}") from None
        return _term_value(phi.term, M, v) in pred
    if isinstance(phi, AtomTr):
        if M.tr_backing is None:
            raise ForcelabError("iterated-truth atom evaluated without a backing store")
        s = _term_value(phi.stage, M, v)
        c = _term_value(phi.code, M, v)
        z = _term_value(phi.valuation, M, v)
        decoded = _decode_tr_args(s, c, z)
        if decoded is None:
            return False
        return M.tr_backing(*decoded)
    if isinstance(phi, AtomInG):
        raise ForcelabError("generic-filter atoms are forcing-language only")
    raise ForcelabError(f"unknown atomic node {type(phi).__name__}")


def _eval_raw(M: FiniteStructure, phi: Formula, v) -> bool:
    if isinstance(phi, Not):
        return not _eval(M, phi.sub, v)
    if isinstance(phi, And):
        return all(_eval(M, s, v) for s in phi.subs)
    if isinstance(phi, Or):
        return any(_eval(M, s, v) for s in phi.subs)
    if isinstance(phi, (Forall, Exists)):
        want_all = isinstance(phi, Forall)
        body = phi.body
        ext = dict(v)
        for values in itertools.product(M.domain, repeat=len(phi.vars)):
            for var_name, value in zip(phi.vars, values):
                ext[var_name] = value
            # memo keys materialize v's values immediately, so reuse is safe
            if _eval(M, body, ext) != want_all:
                return not want_all
        return want_all
    raise ForcelabError(f"unknown formula node {type(phi).__name__}")


def _decode_tr_args(s: HFSet, c: HFSet, z: HFSet):
    """Decode (stage, formula, valuation) or None; junk arguments make the atom false."""
    stage = nat_decode(s)
    if stage is None:
        return None
    phi = decode_formula(c)
    if phi is None:
        return None
    val = decode_valuation(z)
    if val is None:
        return None
    return stage, phi, val


# ---------------------------------------------------------------------------
# Plain truth predicates.

def _instances(M: FiniteStructure, phi: Formula, budget: int = EVAL_BUDGET):
    fv = tuple(sorted(phi.free))
    if len(M.domain) ** len(fv) > budget:
        raise BudgetError(f"{len(M.domain)}^{len(fv)} valuations for one formula")
    for values in itertools.product(M.domain, repeat=len(fv)):
        yield dict(zip(fv, values))


@dataclass(frozen=True)
class TruthPredicate:
    structure: FiniteStructure
    pool: tuple[Formula, ...]
    pairs: frozenset

    def holds(self, phi: Formula, valuation: dict[str, HFSet] | None = None) -> bool:
        return (phi, _val_key(phi, valuation or {})) in self.pairs


def _check_pool_closed(pool: Sequence[Formula]):
    closed = set(subformula_closure(pool))
    if set(pool) != closed:
        missing = closed - set(pool)
        raise ClosureError(
            f"pool is not subformula-closed; missing e.g. {formula_to_sexp(next(iter(missing)))}")


def tarski_truth(M: FiniteStructure, pool: Sequence[Formula]) -> TruthPredicate:
    """The unique truth predicate on a subformula-closed pool.

    Computed as a staged recursion on formula rank and cross-checked
    against direct evaluation.
    """
    _check_pool_closed(pool)
    pool = tuple(sorted(set(pool), key=lambda f: (f.rank, formula_to_sexp(f))))
    inst, codec = tarski_truth_instance(M, pool)
    sol = etr_mod.etr_solve(inst)
    pairs = set()
    for slice_ in sol.slices:
        for enc in slice_:
            phi, v = codec[enc]
            pairs.add((phi, _val_key(phi, v)))
    for phi in pool:
        for v in _instances(M, phi):
            direct = eval_formula(M, phi, v)
            if direct != ((phi, _val_key(phi, v)) in pairs):
                raise ForcelabError(
                    f"staged truth disagrees with direct evaluation at {formula_to_sexp(phi)}")
    return TruthPredicate(M, pool, frozenset(pairs))


def tarski_truth_instance(M: FiniteStructure, pool: Sequence[Formula]):
    """The truth predicate as a recursion instance staged by parse-tree rank."""
    pool = tuple(sorted(set(pool), key=lambda f: (f.rank, formula_to_sexp(f))))
    codec: dict[HFSet, tuple[Formula, dict]] = {}
    rank_of: dict[HFSet, int] = {}
    for phi in pool:
        for v in _instances(M, phi):
            enc = hf_pair(encode_formula(phi), encode_valuation(v))
            codec[enc] = (phi, v)
            rank_of[enc] = phi.rank
    length = max((phi.rank for phi in pool), default=0) + 1

    def lookup(view, psi: Formula, v: dict) -> bool:
        enc = hf_pair(encode_formula(psi), encode_valuation({x: v[x] for x in psi.free}))
        return view(psi.rank, enc)

    def step(x: HFSet, alpha: int, view, _param) -> bool:
        phi, v = codec[x]
        if phi.rank != alpha:
            return False
        if phi.rank == 0:
            return eval_formula(M, phi, v)
        if isinstance(phi, Not):
            return not lookup(view, phi.sub, v)
        if isinstance(phi, And):
            return all(lookup(view, s, v) for s in phi.subs)
        if isinstance(phi, Or):
            return any(lookup(view, s, v) for s in phi.subs)
        if isinstance(phi, (Forall, Exists)):
            want_all = isinstance(phi, Forall)
            for values in itertools.product(M.domain, repeat=len(phi.vars)):
                ext = dict(v)
                ext.update(zip(phi.vars, values))
                if lookup(view, phi.body, ext) != want_all:
                    return not want_all
            return want_all
        raise ForcelabError(f"unknown formula node {type(phi).__name__}")

    inst = etr_mod.RecursionInstance(
        length=length, domain=tuple(sorted(codec, key=lambda e: e.key)),
        step=step, label="tarski-truth")
    return inst, codec


# ---------------------------------------------------------------------------
# Iterated truth predicates.

class IteratedTruthPredicate:
    """Staged truth: stage β judges truth-atoms about stages α < β only.

    Queries are computed on demand by the defining recursion (well-founded
    on stage, then parse-tree rank) and memoized; `triples` materializes
    the pool instances over domain valuations.
    """

    def __init__(self, M: FiniteStructure, beta_max: int, pool: Sequence[Formula]):
        _check_pool_closed(pool)
        for phi in pool:
            if "ground" in phi.const_kinds or "name" in phi.const_kinds:
                raise ForcelabError("iterated-truth pools are constant-free")
        self.structure = M
        self.beta_max = beta_max
        self.pool = tuple(sorted(set(pool), key=lambda f: (f.rank, formula_to_sexp(f))))
        self._pool_set = frozenset(self.pool)
        self._memo: dict = {}

    def holds(self, beta: int, phi: Formula, valuation: dict[str, HFSet] | None = None) -> bool:
        if not 0 <= beta < self.beta_max:
            raise ForcelabError(f"stage {beta} outside 0..{self.beta_max - 1}")
        v = valuation or {}
        if phi.free - set(v):
            raise ForcelabError("valuation must cover the free variables")
        return self._query(beta, phi, v)

    def _query(self, beta: int, phi: Formula, v: dict[str, HFSet]) -> bool:
        key = (beta, phi, _val_key(phi, v))
        got = self._memo.get(key)
        if got is not None:
            return got
        out = self._eval(beta, phi, v)
        self._memo[key] = out
        return out

    def _eval(self, beta: int, phi: Formula, v) -> bool:
        M = self.structure
        if isinstance(phi, AtomTr):
            s = _term_value(phi.stage, M, v)
            c = _term_value(phi.code, M, v)
            z = _term_value(phi.valuation, M, v)
            decoded = _decode_tr_args(s, c, z)
            if decoded is None:
                return False
            alpha, psi, val = decoded
            if alpha >= beta:
                return False
            if psi not in self._pool_set:
                return False
            if set(val) != set(psi.free) or not all(x in M for x in val.values()):
                return False
            return self._query(alpha, psi, val)
        if phi.rank == 0:
            return eval_formula(M, phi, v)
        if isinstance(phi, Not):
            return not self._query(beta, phi.sub, {x: v[x] for x in phi.sub.free})
        if isinstance(phi, And):
            return all(self._query(beta, s, {x: v[x] for x in s.free}) for s in phi.subs)
        if isinstance(phi, Or):
            return any(self._query(beta, s, {x: v[x] for x in s.free}) for s in phi.subs)
        if isinstance(phi, (Forall, Exists)):
            want_all = isinstance(phi, Forall)
            for values in itertools.product(M.domain, repeat=len(phi.vars)):
                ext = dict(v)
                ext.update(zip(phi.vars, values))
                if self._query(beta, phi.body,
                               {x: ext[x] for x in phi.body.free}) != want_all:
                    return not want_all
            return want_all
        raise ForcelabError(f"unknown formula node {type(phi).__name__}")

    def triples(self):
        """All (stage, formula, valuation) pool instances over domain valuations that hold."""
        for beta in range(self.beta_max):
            for phi in self.pool:
                for v in _instances(self.structure, phi):
                    if self._query(beta, phi, v):
                        yield beta, phi, v


def iterated_truth(M: FiniteStructure, beta_max: int, pool: Sequence[Formula]
                   ) -> IteratedTruthPredicate:
    return IteratedTruthPredicate(M, beta_max, pool)


def iterated_truth_instance(M: FiniteStructure, beta_max: int, pool: Sequence[Formula]):
    """The iterated predicate as a stage-major recursion instance (for cross-checks)."""
    pool = tuple(sorted(set(pool), key=lambda f: (f.rank, formula_to_sexp(f))))
    rank_span = max((phi.rank for phi in pool), default=0) + 1
    codec: dict[HFSet, tuple[Formula, dict]] = {}
    for phi in pool:
        for v in _instances(M, phi):
            enc = hf_pair(encode_formula(phi), encode_valuation(v))
            codec[enc] = (phi, v)
    pool_set = frozenset(pool)

    def stage_index(beta: int, rank: int) -> int:
        return beta * rank_span + rank

    def lookup(view, beta: int, psi: Formula, v: dict) -> bool:
        enc = hf_pair(encode_formula(psi),
                      encode_valuation({x: v[x] for x in psi.free}))
        return view(stage_index(beta, psi.rank), enc)

    def step(x: HFSet, alpha: int, view, _param) -> bool:
        phi, v = codec[x]
        beta, rank = divmod(alpha, rank_span)
        if phi.rank != rank:
            return False
        if isinstance(phi, AtomTr):
            decoded = _decode_tr_args(_term_value(phi.stage, M, v),
                                      _term_value(phi.code, M, v),
                                      _term_value(phi.valuation, M, v))
            if decoded is None:
                return False
            a, psi, val = decoded
            if a >= beta or psi not in pool_set:
                return False
            if set(val) != set(psi.free) or not all(x in M for x in val.values()):
                return False
            return lookup(view, a, psi, val)
        if phi.rank == 0:
            return eval_formula(M, phi, v)
        if isinstance(phi, Not):
            return not lookup(view, beta, phi.sub, v)
        if isinstance(phi, And):
            return all(lookup(view, beta, s, v) for s in phi.subs)
        if isinstance(phi, Or):
            return any(lookup(view, beta, s, v) for s in phi.subs)
        if isinstance(phi, (Forall, Exists)):
            want_all = isinstance(phi, Forall)
            for values in itertools.product(M.domain, repeat=len(phi.vars)):
                ext = dict(v)
                ext.update(zip(phi.vars, values))
                if lookup(view, beta, phi.body, ext) != want_all:
                    return not want_all
            return want_all
        raise ForcelabError(f"unknown formula node {type(phi).__name__}")

    inst = etr_mod.RecursionInstance(
        length=beta_max * rank_span, domain=tuple(sorted(codec, key=lambda e: e.key)),
        step=step, label="iterated-truth")
    return inst, codec, stage_index


# ---------------------------------------------------------------------------
# Step rules driven by a formula over a finite structure, for the recursion
# engine: the partial solution enters as a predicate of stage-tagged pairs.

def formula_step(base: FiniteStructure, phi: Formula, length: int,
                 x_var: str = "x", solution_ident: str = "S"):
    """A step rule that evaluates a fixed formula over the base structure,
    with the partial solution visible as a predicate of stage-tagged pairs.

    The tagged pairs ⟨β, y⟩ live in an extended domain so the solution
    predicate is first-order accessible.
    """
    extended = set(base.domain)
    for beta in range(length):
        for y in base.domain:
            extended.add(hf_pair(nat_encode(beta), y))
    extended_sets = transitive_closure(extended)

    def step(x: HFSet, alpha: int, view, _param) -> bool:
        s_pred = frozenset(hf_pair(nat_encode(beta), y)
                           for beta in range(alpha) for y in view.slice(beta))
        M = FiniteStructure(extended_sets,
                            {**base.predicates, solution_ident: s_pred})
        return eval_formula(M, phi, {x_var: x})

    return step


# ---------------------------------------------------------------------------
# The clock-collapse translation: first-order statements about (stage, ∈, A)
# become quantifier-free infinitary statements in the collapse forcing
# language, with free variables left as slots for the slot-names.

def star8_translate(phi: Formula, fa: CollapseNotion) -> Formula:
    """Translate a first-order (=, ∈, A-membership) formula over the clock.

    Membership atoms become op-pair membership in the clock-copy of ∈;
    quantifiers become conjunctions over the check names of clock values.
    """
    from .names import eps_dot

    eps = name_const(eps_dot(fa))
    clock_names = [name_const(check_name(nat_encode(m))) for m in range(fa.clock)]

    def walk(f: Formula) -> Formula:
        if isinstance(f, AtomEq):
            return atom_eq(_slot(f.left), _slot(f.right))
        if isinstance(f, AtomIn):
            return atom_in(pair_term(_slot(f.left), _slot(f.right)), eps)
        if isinstance(f, AtomInClass):
            if f.ident != "A":
                raise ForcelabError(f"only the parameter predicate translates, not {f.ident!r}")
            return atom_in_class(_slot(f.term), "A")
        if isinstance(f, Not):
            return not_(walk(f.sub))
        if isinstance(f, And):
            return and_(walk(s) for s in f.subs)
        if isinstance(f, Or):
            return or_(walk(s) for s in f.subs)
        if isinstance(f, (Forall, Exists)):
            body = walk(f.body)
            conjuncts = []
            for values in itertools.product(clock_names, repeat=len(f.vars)):
                conjuncts.append(substitute(body, dict(zip(f.vars, values))))
            return and_(conjuncts) if isinstance(f, Forall) else or_(conjuncts)
        raise ForcelabError(f"cannot clock-translate {type(f).__name__}")

    def _slot(t: Term) -> Term:
        if isinstance(t, (Var,)):
            return t
        if isinstance(t, (GroundConst,)):
            raise ForcelabError("clock translation takes variables, not ground constants")
        return t  # NameConst slots already filled (quantifier instantiation)

    return walk(phi)


class ForcingTruth:
    """Truth predicate read off the collapse forcing: a statement is declared
    true when the top condition forces its instantiated clock translation."""

    def __init__(self, n: int, A: Iterable[HFSet], pool: Sequence[Formula],
                 include_degenerate_tokens: bool = False):
        from . import forcing as forcing_mod  # forcing imports this module at top level
        from .names import a_dot, n_dot, subname_closure
        from .poset import build_collapse

        _check_pool_closed(pool)
        self.pool = tuple(sorted(set(pool), key=lambda f: (f.rank, formula_to_sexp(f))))
        self.stage_n = n
        self.fa = build_collapse(n, A, include_degenerate_tokens)
        self.A = self.fa.A
        self.a_class = a_dot(self.fa, A)
        self.slot_names = {a: n_dot(self.fa, a) for a in self.fa.targets}
        self._stars = {phi: star8_translate(phi, self.fa) for phi in self.pool}

        seeds: set[PName] = set()
        for star in self._stars.values():
            seeds |= forcing_mod.collect_names(star)
        seeds |= set(self.slot_names.values())
        seeds |= {entry for entry, _ in self.a_class.entries}
        universe = subname_closure(seeds)
        self.relation = forcing_mod.atomic_forcing(
            self.fa, universe, classes=(self.a_class,), eager=False)

    def instance(self, phi: Formula, valuation: dict[str, HFSet]) -> Formula:
        """The closed star-translation with slot-names substituted for free variables."""
        star = self._stars[phi]
        binding = {x: name_const(self.slot_names[valuation[x]]) for x in phi.free}
        return substitute(star, binding)

    def holds(self, phi: Formula, valuation: dict[str, HFSet] | None = None) -> bool:
        v = valuation or {}
        if phi not in self._stars:
            raise ForcelabError("formula outside the declared pool")
        if phi.free - set(v):
            raise ForcelabError("valuation must cover the free variables")
        for x in phi.free:
            if v[x] not in set(self.fa.targets):
                raise ForcelabError("valuation values must lie in the collapsed stage")
        from . import forcing as forcing_mod
        return forcing_mod.forces(self.relation, self.fa.one, self.instance(phi, v),
                                  check_universe=False)


def forcing_truth(n: int, A: Iterable[HFSet], pool: Sequence[Formula],
                  include_degenerate_tokens: bool = False) -> ForcingTruth:
    return ForcingTruth(n, A, pool, include_degenerate_tokens)


def invariance_check(n: int, A: Iterable[HFSet], pool: Sequence[Formula],
                     ft: ForcingTruth | None = None):
    """Every condition forces an instantiated clock translation iff the top does."""
    from . import forcing as forcing_mod

    if ft is None:
        ft = ForcingTruth(n, A, pool)
    for phi in ft.pool:
        for v in _instances(FiniteStructure(ft.fa.targets), phi):
            inst = ft.instance(phi, v)
            at_one = forcing_mod.forces(ft.relation, ft.fa.one, inst, check_universe=False)
            for p in ft.fa.conditions():
                at_p = forcing_mod.forces(ft.relation, p, inst, check_universe=False)
                if at_p != at_one:
                    return False, (p, phi, tuple(sorted(v.items())))
    return True, None


# ---------------------------------------------------------------------------
# The stage translation: compile iterated-truth atoms into infinitary
# formulas, mentioning stages and pool formulas only through their
# defining θ-formulas (never as parameters).

_all_vars_cache: dict[Formula, frozenset[str]] = {}


def _all_vars(phi: Formula) -> frozenset[str]:
    got = _all_vars_cache.get(phi)
    if got is not None:
        return got
    out = frozenset(phi.free)
    if isinstance(phi, Not):
        out |= _all_vars(phi.sub)
    elif isinstance(phi, (And, Or)):
        for s in phi.subs:
            out |= _all_vars(s)
    elif isinstance(phi, (Forall, Exists)):
        out |= frozenset(phi.vars) | _all_vars(phi.body)
    _all_vars_cache[phi] = out
    return out


def _rename_free(phi: Formula, mapping: dict[str, str]) -> Formula:
    """Capture-free renaming of free variables; targets must be fresh."""
    taken = _all_vars(phi)
    for target in mapping.values():
        if target in taken:
            raise ForcelabError(f"rename target {target!r} already occurs")
    return _rename(phi, mapping, {})


def _rename(phi: Formula, mapping: dict[str, str], memo: dict) -> Formula:
    key = (phi, tuple(sorted(mapping.items())))
    got = memo.get(key)
    if got is not None:
        return got
    if isinstance(phi, AtomEq):
        out = atom_eq(_rename_term(phi.left, mapping), _rename_term(phi.right, mapping))
    elif isinstance(phi, AtomIn):
        out = atom_in(_rename_term(phi.left, mapping), _rename_term(phi.right, mapping))
    elif isinstance(phi, AtomInClass):
        out = atom_in_class(_rename_term(phi.term, mapping), phi.ident)
    elif isinstance(phi, AtomTr):
        out = atom_tr(_rename_term(phi.stage, mapping), _rename_term(phi.code, mapping),
                      _rename_term(phi.valuation, mapping))
    elif isinstance(phi, Not):
        out = not_(_rename(phi.sub, mapping, memo))
    elif isinstance(phi, And):
        out = and_(_rename(s, mapping, memo) for s in phi.subs)
    elif isinstance(phi, Or):
        out = or_(_rename(s, mapping, memo) for s in phi.subs)
    elif isinstance(phi, (Forall, Exists)):
        inner = {k: t for k, t in mapping.items() if k not in phi.vars}
        body = _rename(phi.body, inner, memo)
        out = forall(phi.vars, body) if isinstance(phi, Forall) else exists(phi.vars, body)
    else:
        raise ForcelabError(f"cannot rename {type(phi).__name__}")
    memo[key] = out
    return out


def _rename_term(t: Term, mapping: dict[str, str]) -> Term:
    if isinstance(t, Var) and t.name in mapping:
        return var(mapping[t.name])
    if isinstance(t, PairTerm):
        return pair_term(_rename_term(t.left, mapping), _rename_term(t.right, mapping))
    return t


def _described_membership(set_var: str, element_formulas: Sequence[Formula],
                          bound: str) -> Formula:
    """∀bound (bound ∈ set_var ⟺ ⋁ element_formulas(bound))."""
    return forall((bound,), iff(atom_in(var(bound), var(set_var)), or_(element_formulas)))


def _valuation_description(z_var: str, entries: Sequence[tuple[HFSet, str]]) -> Formula:
    """The formula saying z is exactly the coded map {var-code ↦ value-variable}.

    Each entry is (code of the variable identifier, name of the fresh
    variable holding the value).
    """
    pair_formulas = []
    for code, a in entries:
        sing = forall(("t",), iff(atom_in(var("t"), var("u")), theta_formula(code, "t")))
        doub = forall(("t",), iff(atom_in(var("t"), var("u")),
                                  or_([theta_formula(code, "t"), atom_eq(var("t"), var(a))])))
        pair_formulas.append(
            forall(("u",), iff(atom_in(var("u"), var("w")), or_([sing, doub]))))
    body = _described_membership(z_var, pair_formulas, "w")
    return body


class StageTranslator:
    """Memoized stage translation over a fixed pool and stage cap."""

    def __init__(self, pool: Sequence[Formula], stage_cap: int):
        _check_pool_closed(pool)
        self.pool = tuple(sorted(set(pool), key=lambda f: (f.rank, formula_to_sexp(f))))
        self.stage_cap = stage_cap
        self._memo: dict[tuple[int, Formula], Formula] = {}

    def translate(self, beta: int, phi: Formula) -> Formula:
        if beta > self.stage_cap:
            raise BudgetError(f"stage {beta} exceeds the cap {self.stage_cap}")
        key = (beta, phi)
        got = self._memo.get(key)
        if got is None:
            got = self._translate(beta, phi)
            self._memo[key] = got
        return got

    def _translate(self, beta: int, phi: Formula) -> Formula:
        if isinstance(phi, AtomTr):
            return self._translate_tr(beta, phi)
        if phi.rank == 0:
            return phi
        if isinstance(phi, Not):
            return not_(self.translate(beta, phi.sub))
        if isinstance(phi, And):
            return and_(self.translate(beta, s) for s in phi.subs)
        if isinstance(phi, Or):
            return or_(self.translate(beta, s) for s in phi.subs)
        if isinstance(phi, Forall):
            return forall(phi.vars, self.translate(beta, phi.body))
        if isinstance(phi, Exists):
            return exists(phi.vars, self.translate(beta, phi.body))
        raise ForcelabError(f"cannot stage-translate {type(phi).__name__}")

    def _translate_tr(self, beta: int, phi: AtomTr) -> Formula:
        from .formulas import _encode_str  # the identifier coding is fixed package-wide

        for t in (phi.stage, phi.code, phi.valuation):
            if isinstance(t, GroundConst) and t is phi.code:
                if decode_formula(t.value) not in set(self.pool):
                    raise ClosureError("truth atom mentions a formula outside the pool")
            elif not isinstance(t, Var):
                raise ForcelabError("truth-atom arguments must be variables")
        x, y, z = phi.stage.name, phi.code.name, phi.valuation.name
        disjuncts = []
        for xi in range(beta):
            stage_code = nat_encode(xi)
            for psi in self.pool:
                fv = tuple(sorted(psi.free))
                psi_star = self.translate(xi, psi)
                taken = _all_vars(psi_star) | {x, y, z}
                fresh: list[str] = []
                i = 0
                while len(fresh) < len(fv):
                    if f"h{i}" not in taken:
                        fresh.append(f"h{i}")
                    i += 1
                renamed = _rename_free(psi_star, dict(zip(fv, fresh)))
                desc = _valuation_description(
                    z, [(_encode_str(v), a) for v, a in zip(fv, fresh)])
                inner = and_([desc, renamed])
                ex = exists(tuple(fresh), inner) if fresh else inner
                disjuncts.append(and_([
                    theta_formula(stage_code, x),
                    theta_formula(encode_formula(psi), y),
                    ex,
                ]))
        return or_(disjuncts)


def iterated_translate(beta: int, phi: Formula, pool: Sequence[Formula],
                       stage_cap: int) -> Formula:
    """One-shot stage translation; reuse a StageTranslator for sweeps."""
    return StageTranslator(pool, stage_cap).translate(beta, phi)


class DerivedIteratedTruth:
    """The iterated predicate obtained by evaluating stage translations directly."""

    def __init__(self, M: FiniteStructure, pool: Sequence[Formula], stage_cap: int):
        self.structure = M
        self.translator = StageTranslator(pool, stage_cap)
        self.pool = self.translator.pool

    def holds(self, beta: int, phi: Formula, valuation: dict[str, HFSet] | None = None) -> bool:
        return eval_formula(self.structure, self.translator.translate(beta, phi),
                            valuation or {})


def stage_comparison_structure(base: FiniteStructure, pool: Sequence[Formula],
                               stage_cap: int, valuation_arity_cap: int = 1
                               ) -> FiniteStructure:
    """Extend the base domain transitively with every code the stage
    translation's θ-formulas must be able to pin down.

    Coded valuations are included for formulas of small arity only; each
    one enlarges the quantifier domain, and the domain size enters the
    evaluation cost quadratically.
    """
    extra: set[HFSet] = set(base.domain)
    for xi in range(stage_cap + 1):
        extra.add(nat_encode(xi))
    for psi in pool:
        extra.add(encode_formula(psi))
        fv = tuple(sorted(psi.free))
        if len(fv) > valuation_arity_cap:
            continue
        for values in itertools.product(base.domain, repeat=len(fv)):
            extra.add(encode_valuation(dict(zip(fv, values))))
    return FiniteStructure(transitive_closure(extra), base.predicates)
