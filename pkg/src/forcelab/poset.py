"""Finite forcing notions: preorders with a designated top condition.

Conditions are ordered by strength (lower = stronger).  Everything here
works on arbitrary preorders; equivalent conditions (p ≤ q ≤ p) are
permitted and all machinery is invariant under swapping equivalents.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import sexpr
from .errors import BudgetError, ForcelabError, ParseError
from .hfset import HFSet, v_stage

DENSE_SAMPLE_LIMIT = 12  # exhaustive dense-set verification up to this size
DENSE_SAMPLE_COUNT = 400
COLLAPSE_BUDGET = 5000


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class CollapseFn:
    """A finite injective partial function clock-slot -> target set."""

    graph: tuple[tuple[int, HFSet], ...]  # sorted by slot

    def mapping(self) -> dict[int, HFSet]:
        return dict(self.graph)


@dataclass(frozen=True)
class SupIn:
    """Supremum token for the conditions f with f(i) ∈ f(j)."""

    i: int
    j: int


@dataclass(frozen=True)
class SupA:
    """Supremum token for the conditions f with f(i) in the parameter set."""

    i: int


class ForcingNotion:
    """A finite preorder with top element at index 0.

    `le(p, q)` means condition p is at least as strong as q.  The relation
    is stored reflexively and transitively closed.
    """

    def __init__(self, elements: Sequence[str], le_pairs: Iterable[tuple[int, int]],
                 tags: Sequence[object] | None = None):
        self.elements = tuple(elements)
        if not self.elements:
            raise ForcelabError("a forcing notion needs at least the top condition")
        if len(set(self.elements)) != len(self.elements):
            raise ForcelabError("duplicate condition tokens")
        n = len(self.elements)
        up = [set() for _ in range(n)]  # up[p] = {q : p ≤ q}
        for p in range(n):
            up[p].add(p)
            up[p].add(0)
        for p, q in le_pairs:
            up[p].add(q)
        changed = True
        while changed:
            changed = False
            for p in range(n):
                new = set().union(*(up[q] for q in up[p]))
                if not new <= up[p]:
                    up[p] |= new
                    changed = True
        self._up = tuple(frozenset(s) for s in up)
        down = [set() for _ in range(n)]
        for p in range(n):
            for q in self._up[p]:
                down[q].add(p)
        self._down = tuple(frozenset(s) for s in down)
        self.tags = tuple(tags) if tags is not None else None
        self._index = {tok: i for i, tok in enumerate(self.elements)}

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def one(self) -> int:
        return 0

    def index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise ForcelabError(f"unknown condition token {token!r}") from None

    def le(self, p: int, q: int) -> bool:
        return q in self._up[p]

    def down(self, p: int) -> frozenset[int]:
        """All extensions of p (conditions at least as strong)."""
        return self._down[p]

    def up(self, p: int) -> frozenset[int]:
        return self._up[p]

    def equivalent(self, p: int, q: int) -> bool:
        return self.le(p, q) and self.le(q, p)

    def compatible(self, p: int, q: int) -> bool:
        return not self._down[p].isdisjoint(self._down[q])

    def conditions(self) -> range:
        return range(len(self.elements))

    def to_sexp(self) -> str:
        pairs = [[self.elements[p], self.elements[q]]
                 for p in self.conditions() for q in self._up[p] if p != q]
        return sexpr.show(["poset", ["elems", *self.elements],
                           ["one", self.elements[0]], ["le", *pairs]])

    def __repr__(self) -> str:
        return f"ForcingNotion({len(self)} conditions)"


def parse_poset(text: str) -> ForcingNotion:
    form = sexpr.read(text)
    if not isinstance(form, list) or not form or form[0] != "poset":
        raise ParseError("expected (poset ...)")
    elems: list[str] | None = None
    one: str | None = None
    pairs: list[tuple[str, str]] = []
    for clause in form[1:]:
        if not isinstance(clause, list) or not clause:
            raise ParseError("bad poset clause")
        head = clause[0]
        if head == "elems":
            elems = [e for e in clause[1:]]
        elif head == "one":
            if len(clause) != 2:
                raise ParseError("(one <token>) takes one token")
            one = clause[1]
        elif head == "le":
            for pair in clause[1:]:
                if not (isinstance(pair, list) and len(pair) == 2):
                    raise ParseError("le entries are (<stronger> <weaker>) pairs")
                pairs.append((pair[0], pair[1]))
        else:
            raise ParseError(f"unknown poset clause {head!r}")
    if elems is None or one is None:
        raise ParseError("poset needs (elems ...) and (one ...)")
    if one not in elems:
        raise ParseError(f"top {one!r} not among elements")
    ordered = [one] + [e for e in elems if e != one]
    idx = {tok: i for i, tok in enumerate(ordered)}
    return ForcingNotion(ordered, [(idx[a], idx[b]) for a, b in pairs])


def make_notion(elements: Sequence[str], le_pairs: Iterable[tuple[str, str]] = ()) -> ForcingNotion:
    """Convenience constructor from tokens; the first element is the top."""
    idx = {tok: i for i, tok in enumerate(elements)}
    return ForcingNotion(elements, [(idx[a], idx[b]) for a, b in le_pairs])


@dataclass(frozen=True)
class Filter:
    """An upward-closed, downward-directed set of conditions."""

    notion: ForcingNotion
    members: frozenset[int]

    def __contains__(self, p: int) -> bool:
        return p in self.members

    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))


def is_filter(P: ForcingNotion, members: frozenset[int]) -> bool:
    if not members:
        return False
    for p in members:
        if not P.up(p) <= members:
            return False
    for p in members:
        for q in members:
            if not any(r in members for r in P.down(p) & P.down(q)):
                return False
    return True


def is_separative(P: ForcingNotion) -> tuple[bool, tuple[int, int] | None]:
    """Check: whenever p ≰ q, some r ≤ p is incompatible with q."""
    for p in P.conditions():
        for q in P.conditions():
            if P.le(p, q):
                continue
            if not any(not P.compatible(r, q) for r in P.down(p)):
                return False, (p, q)
    return True, None


def is_dense(P: ForcingNotion, D: Iterable[int]) -> bool:
    dset = set(D)
    return all(dset & P.down(p) for p in P.conditions())


def is_dense_below(P: ForcingNotion, D: Iterable[int], p: int) -> bool:
    dset = set(D)
    return all(dset & P.down(q) for q in P.down(p))


def minimal_classes(P: ForcingNotion) -> list[frozenset[int]]:
    """Equivalence classes of ≤-minimal conditions, canonically ordered."""
    classes = []
    seen: set[int] = set()
    for p in P.conditions():
        if p in seen:
            continue
        if all(P.le(p, q) for q in P.down(p)):
            cls = frozenset(q for q in P.down(p) if P.equivalent(p, q))
            classes.append(cls)
            seen |= cls
    return sorted(classes, key=lambda c: min(c))


def generic_filters(P: ForcingNotion, verify: bool = True,
                    sample_count: int = DENSE_SAMPLE_COUNT, seed: int = 0) -> list[Filter]:
    """The filters meeting every dense subset: one per minimal-element class.

    The closed-form computation is verified against the definition, either
    exhaustively (|P| ≤ 12) or on seeded sampled dense sets above that.
    """
    filters = []
    seen: set[frozenset[int]] = set()
    for cls in minimal_classes(P):
        members = frozenset(P.up(min(cls)))
        if members not in seen:
            seen.add(members)
            filters.append(Filter(P, members))
    if verify:
        _verify_generic(P, filters, sample_count, seed)
    return filters


def _dense_subsets(P: ForcingNotion, sample_count: int, seed: int):
    n = len(P)
    if n <= DENSE_SAMPLE_LIMIT:
        for mask in range(1 << n):
            D = frozenset(i for i in range(n) if mask >> i & 1)
            if is_dense(P, D):
                yield D
        return
    # Canonical dense families first, then seeded random subsets.
    for p in P.conditions():
        yield frozenset(q for q in P.conditions()
                        if P.le(q, p) or not P.compatible(q, p))
    yield frozenset().union(*minimal_classes(P))
    rng = random.Random(seed)
    for _ in range(sample_count):
        D = frozenset(i for i in range(n) if rng.random() < 0.5)
        if is_dense(P, D):
            yield D


def _verify_genericity_of(P: ForcingNotion, members: frozenset[int],
                          sample_count: int, seed: int) -> frozenset[int] | None:
    """Return a dense set the candidate misses, or None."""
    for D in _dense_subsets(P, sample_count, seed):
        if not (D & members):
            return D
    return None


def _verify_generic(P: ForcingNotion, filters: list[Filter], sample_count: int, seed: int):
    for F in filters:
        missed = _verify_genericity_of(P, F.members, sample_count, seed)
        if missed is not None:
            raise ForcelabError(
                f"claimed generic filter {sorted(F.members)} misses dense set {sorted(missed)}")
    if len(P) > DENSE_SAMPLE_LIMIT:
        return
    returned = {F.members for F in filters}
    all_filters = [frozenset(i for i in range(len(P)) if mask >> i & 1)
                   for mask in range(1 << len(P))]
    all_filters = [f for f in all_filters if is_filter(P, f)]
    maximal = [f for f in all_filters if not any(f < g for g in all_filters)]
    for f in maximal:
        if f in returned:
            continue
        if _verify_genericity_of(P, f, sample_count, seed) is None:
            raise ForcelabError(f"omitted filter {sorted(f)} meets every dense set")


# ---------------------------------------------------------------------------
# The collapse-with-suprema notion.

class CollapseNotion(ForcingNotion):
    """Collapse of a cumulative stage onto its own clock, with supremum tokens.

    Conditions are the injective partial functions from the clock
    {0..k-1} into the stage (k = stage size), ordered by reverse inclusion,
    together with tokens: e(i,j) above exactly the f with f(i) ∈ f(j), and
    a(i) above exactly the f with f(i) ∈ A.  Minimal conditions are then
    the total bijections from the clock onto the stage.

    Tokens whose defining class of conditions is empty (e.g. e(i,i), or
    every a(i) when A is empty) break the everywhere-invariance of forcing
    star-translated statements, so they are omitted unless explicitly
    requested via include_degenerate_tokens.
    """

    def __init__(self, stage: int, A: Iterable[HFSet],
                 include_degenerate_tokens: bool = False,
                 budget: int = COLLAPSE_BUDGET):
        targets = v_stage(stage)
        k = len(targets)
        self.stage = stage
        self.clock = k
        self.targets = tuple(targets)
        self.A = frozenset(A)
        if not self.A <= set(targets):
            raise ForcelabError("parameter set must be a subset of the stage")

        fns = [CollapseFn(())]
        frontier = [CollapseFn(())]
        while frontier:
            nxt = []
            for fn in frontier:
                m = fn.mapping()
                used = set(m.values())
                slot = len(m)  # grow by slot order, then filter: enumerate all domains
                del slot
                for i in range(k):
                    if i in m:
                        continue
                    if any(i < s for s in m):  # add slots in increasing order only
                        continue
                    for t in targets:
                        if t not in used:
                            nxt.append(CollapseFn(tuple(sorted(m.items())) + ((i, t),)))
                if len(fns) + len(nxt) > budget:
                    raise BudgetError(f"collapse notion exceeds budget {budget}")
            fns.extend(nxt)
            frontier = nxt

        elements = ["1"]
        tags: list[object] = [Top()]
        self.fn_index: dict[CollapseFn, int] = {CollapseFn(()): 0}
        for fn in sorted((f for f in fns if f.graph),
                         key=lambda f: tuple((i, t.key) for i, t in f.graph)):
            self.fn_index[fn] = len(elements)
            elements.append("f{" + ",".join(f"{i}:{targets.index(t)}" for i, t in fn.graph) + "}")
            tags.append(fn)

        def realizers_e(i: int, j: int) -> list[int]:
            return [self.fn_index[f] for f in fns
                    if i in dict(f.graph) and j in dict(f.graph)
                    and dict(f.graph)[i] in dict(f.graph)[j]]

        def realizers_a(i: int) -> list[int]:
            return [self.fn_index[f] for f in fns
                    if i in dict(f.graph) and dict(f.graph)[i] in self.A]

        self.e_index: dict[tuple[int, int], int] = {}
        self.a_index: dict[int, int] = {}
        pairs: list[tuple[int, int]] = []
        for i in range(k):
            for j in range(k):
                below = realizers_e(i, j)
                if not below and not include_degenerate_tokens:
                    continue
                self.e_index[(i, j)] = len(elements)
                elements.append(f"e_{i}_{j}")
                tags.append(SupIn(i, j))
                pairs.extend((b, self.e_index[(i, j)]) for b in below)
        for i in range(k):
            below = realizers_a(i)
            if not below and not include_degenerate_tokens:
                continue
            self.a_index[i] = len(elements)
            elements.append(f"a_{i}")
            tags.append(SupA(i))
            pairs.extend((b, self.a_index[i]) for b in below)

        # f ≤ g iff f extends g, for collapse functions.
        for f in fns:
            for g in fns:
                if f is not g and set(g.graph) <= set(f.graph):
                    pairs.append((self.fn_index[f], self.fn_index[g]))

        super().__init__(elements, pairs, tags)

    def fn_condition(self, mapping: dict[int, HFSet]) -> int:
        return self.fn_index[CollapseFn(tuple(sorted(mapping.items())))]


def build_collapse(n: int, A: Iterable[HFSet],
                   include_degenerate_tokens: bool = False,
                   budget: int = COLLAPSE_BUDGET) -> CollapseNotion:
    """The finite analogue of the augmented collapse forcing over stage n."""
    return CollapseNotion(n, A, include_degenerate_tokens, budget)
