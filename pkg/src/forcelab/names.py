"""P-names over a finite forcing notion, and their evaluation.

A name is hereditarily a finite set of (name, condition-index) pairs.
Names are interned like HF sets: one canonical instance per value, with
entries kept sorted by the canonical order (name rank first), immutable
and shareable after single-threaded construction.  Condition indices
refer to positions in a notion's element list; index 0 is the top
condition of every notion, which is what makes check names portable.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Iterator

from . import sexpr
from .errors import BudgetError, ForcelabError, ParseError
from .hfset import EMPTY, HFSet, hf_make, hf_pair, nat_encode
from .poset import CollapseNotion, Filter, ForcingNotion

_intern: dict[tuple, "PName"] = {}

NAME_UNIVERSE_BUDGET = 20000


class PName:
    """An interned P-name.  Use :func:`name_make` to construct."""

    __slots__ = ("entries", "rank", "key", "_hash")

    entries: tuple[tuple["PName", int], ...]
    rank: int

    def __init__(self, entries, rank, hash_):
        self.entries = entries
        self.rank = rank
        self._hash = hash_
        self.key = _sort_key(self)

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "PName") -> bool:
        return name_cmp(self, other) < 0

    def __iter__(self) -> Iterator[tuple["PName", int]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        if not self.entries:
            return "name{}"
        return "name{" + ", ".join(f"({n!r},{r})" for n, r in self.entries) + "}"

    def max_condition(self) -> int:
        out = 0
        for n, r in self.entries:
            out = max(out, r, n.max_condition())
        return out


def name_cmp(a: PName, b: PName) -> int:
    """Canonical total order: rank first, then lexicographically on entries."""
    if a is b:
        return 0
    if a.rank != b.rank:
        return -1 if a.rank < b.rank else 1
    for (n1, r1), (n2, r2) in zip(a.entries, b.entries):
        c = name_cmp(n1, n2)
        if c:
            return c
        if r1 != r2:
            return -1 if r1 < r2 else 1
    return -1 if len(a.entries) < len(b.entries) else 1


_sort_key = functools.cmp_to_key(name_cmp)

_entry_key = functools.cmp_to_key(
    lambda e1, e2: name_cmp(e1[0], e2[0]) or (e1[1] > e2[1]) - (e1[1] < e2[1]))


def name_make(entries: Iterable[tuple[PName, int]] = ()) -> PName:
    uniq = sorted(set(entries), key=_entry_key)
    tup = tuple(uniq)
    cached = _intern.get(tup)
    if cached is not None:
        return cached
    rank = 0 if not tup else 1 + max(n.rank for n, _ in tup)
    hash_ = hash((rank, tuple((n._hash, r) for n, r in tup)))
    made = PName(tup, rank, hash_)
    _intern[tup] = made
    return made


EMPTY_NAME = name_make()


@dataclass(frozen=True)
class ClassName:
    """A name-shaped object used as a predicate symbol, never as a constant."""

    ident: str
    entries: tuple[tuple[PName, int], ...]

    @staticmethod
    def make(ident: str, entries: Iterable[tuple[PName, int]]) -> "ClassName":
        return ClassName(ident, tuple(sorted(set(entries), key=_entry_key)))


def subnames(name: PName) -> set[PName]:
    out = {name}
    for n, _ in name.entries:
        out |= subnames(n)
    return out


def subname_closure(names: Iterable[PName]) -> tuple[PName, ...]:
    out: set[PName] = set()
    for n in names:
        out |= subnames(n)
    return tuple(sorted(out, key=lambda n: n.key))


def is_subname_closed(names: Iterable[PName]) -> bool:
    pool = set(names)
    return all(n in pool for name in pool for n, _ in name.entries)


_check_cache: dict[HFSet, PName] = {}


def check_name(x: HFSet) -> PName:
    """The canonical name x̌ = {(y̌, 1) : y ∈ x}, whose value is always x."""
    cached = _check_cache.get(x)
    if cached is None:
        cached = name_make((check_name(y), 0) for y in x)
        _check_cache[x] = cached
    return cached


def op_name(sigma: PName, tau: PName) -> PName:
    """Canonical name for the Kuratowski pair of the two names' values."""
    left = name_make([(sigma, 0)])
    return name_make([(left, 0), (name_make([(sigma, 0), (tau, 0)]), 0)])


def vec_name(components: Iterable[PName]) -> PName:
    """Right-nested op-pair encoding of a finite sequence of names."""
    out = check_name(EMPTY)
    for c in reversed(list(components)):
        out = op_name(c, out)
    return out


def g_dot(P: ForcingNotion) -> ClassName:
    """Canonical class name of the generic filter: pairs (ǐ, i), conditions as naturals."""
    return ClassName.make("G", ((check_name(nat_encode(i)), i) for i in P.conditions()))


def _require_collapse(P: ForcingNotion) -> CollapseNotion:
    if not isinstance(P, CollapseNotion):
        raise ForcelabError("this name requires a collapse notion with supremum tokens")
    return P


def eps_dot(P: ForcingNotion) -> PName:
    """Name of the clock-copy of membership: pairs ⟨op(ǐ, ǰ), e(i,j)⟩."""
    C = _require_collapse(P)
    return name_make(
        (op_name(check_name(nat_encode(i)), check_name(nat_encode(j))), e)
        for (i, j), e in C.e_index.items())


def a_dot(P: ForcingNotion, A: Iterable[HFSet]) -> ClassName:
    """Class name of the clock-copy of the parameter set: pairs ⟨ǐ, a(i)⟩."""
    C = _require_collapse(P)
    if frozenset(A) != C.A:
        raise ForcelabError("parameter set disagrees with the notion's parameter")
    return ClassName.make("A", ((check_name(nat_encode(i)), a) for i, a in C.a_index.items()))


def n_dot(P: ForcingNotion, a: HFSet) -> PName:
    """Name of the clock slot that the generic bijection sends to a."""
    C = _require_collapse(P)
    if a not in set(C.targets):
        raise ForcelabError("value must lie in the collapsed stage")
    return name_make(
        (check_name(nat_encode(k)), C.fn_condition({n: a}))
        for n in range(C.clock) for k in range(n))


def name_universe(P: ForcingNotion, rho: int | None = None,
                  seeds: Iterable[PName] | None = None,
                  budget: int = NAME_UNIVERSE_BUDGET) -> tuple[PName, ...]:
    """Name pool for quantifier clauses: exhaustive to rank rho, or seeded closure.

    Exhaustive mode returns every name of rank ≤ rho (rho ≤ 2); seeded mode
    returns the subname closure of the seeds.  Output is subname-closed and
    canonically ordered either way.
    """
    if seeds is not None:
        out = subname_closure(seeds)
        if len(out) > budget:
            raise BudgetError(f"seeded universe has {len(out)} names, budget {budget}")
        return out
    if rho is None:
        raise ForcelabError("need a rank bound or seeds")
    if rho > 2:
        raise BudgetError("exhaustive name universes are limited to rank 2; pass seeds instead")
    layer = [EMPTY_NAME]
    for _ in range(rho):
        pairs = [(n, p) for n in layer for p in P.conditions()]
        if 2 ** len(pairs) > budget:
            raise BudgetError(
                f"exhaustive universe would have 2^{len(pairs)} names, budget {budget}")
        layer = [name_make(tuple(pairs[i] for i in range(len(pairs)) if mask >> i & 1))
                 for mask in range(1 << len(pairs))]
    return tuple(sorted(set(layer), key=lambda n: n.key))


def eval_name(name: PName, G: Filter, _memo: dict | None = None) -> HFSet:
    """Direct recursive evaluation: the values of entries whose condition is in G."""
    if _memo is None:
        _memo = {}
    cached = _memo.get(name)
    if cached is None:
        cached = hf_make(eval_name(n, G, _memo) for n, r in name.entries if r in G.members)
        _memo[name] = cached
    return cached


def eval_class(cls: ClassName, G: Filter) -> frozenset[HFSet]:
    memo: dict = {}
    return frozenset(eval_name(n, G, memo) for n, r in cls.entries if r in G.members)


def name_to_hf(name: PName) -> HFSet:
    """Injective coding of a name as an HF set of (coded entry, condition ordinal) pairs."""
    return hf_make(hf_pair(name_to_hf(n), nat_encode(r)) for n, r in name.entries)


# ---------------------------------------------------------------------------
# Text form: (name (pair <name> <cond-token>) ...) with sugar
# (check <hf>) and (opname <name> <name>).

def parse_name(form, P: ForcingNotion) -> PName:
    from .formulas import parse_hf  # hf literals share the formula grammar

    if not isinstance(form, list) or not form:
        raise ParseError("expected a name form")
    head = form[0]
    if head == "check":
        if len(form) != 2:
            raise ParseError("(check <hf>) takes one set")
        return check_name(parse_hf(form[1]))
    if head == "opname":
        if len(form) != 3:
            raise ParseError("(opname <name> <name>) takes two names")
        return op_name(parse_name(form[1], P), parse_name(form[2], P))
    if head == "name":
        entries = []
        for entry in form[1:]:
            if not (isinstance(entry, list) and len(entry) == 3 and entry[0] == "pair"):
                raise ParseError("name entries are (pair <name> <cond-token>)")
            entries.append((parse_name(entry[1], P), P.index(entry[2])))
        return name_make(entries)
    raise ParseError(f"unknown name form {head!r}")


def name_to_sexp(name: PName, P: ForcingNotion) -> str:
    def walk(n: PName):
        return ["name"] + [["pair", walk(m), P.elements[r]] for m, r in n.entries]

    return sexpr.show(walk(name))
