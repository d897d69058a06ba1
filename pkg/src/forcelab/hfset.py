"""Canonical hereditarily finite sets.

Every extensionally distinct set has exactly one interned instance, so
equality is identity.  Each value caches a hash combined from its
children's hashes, and the total order used wherever ties must be broken
(rank first, then lexicographically on the ordered children) is computed
by a comparator that short-circuits on shared subtrees, which keeps deep
chains such as von Neumann ordinals cheap.

Values are immutable and safely shareable once constructed; the interning
table itself is confined to single-threaded construction.
"""

from __future__ import annotations

import functools
from typing import Iterable, Iterator

from .errors import BudgetError

STAGE_CAP = 5  # |v_stage(5)| = 65536; larger stages are refused

_intern: dict[tuple, "HFSet"] = {}


class HFSet:
    """An interned hereditarily finite set.  Use :func:`hf_make` to construct."""

    __slots__ = ("children", "rank", "key", "_hash")

    children: tuple["HFSet", ...]
    rank: int

    def __init__(self, children: tuple["HFSet", ...], rank: int, hash_: int):
        self.children = children
        self.rank = rank
        self._hash = hash_
        self.key = _sort_key(self)

    def __hash__(self) -> int:
        return self._hash

    # Interning makes identity the same as extensional equality; the default
    # object __eq__ is therefore correct (and O(1)).

    def __lt__(self, other: "HFSet") -> bool:
        return hf_cmp(self, other) < 0

    def __le__(self, other: "HFSet") -> bool:
        return hf_cmp(self, other) <= 0

    def __contains__(self, x: "HFSet") -> bool:
        return any(x is c for c in self.children)

    def __iter__(self) -> Iterator["HFSet"]:
        return iter(self.children)

    def __len__(self) -> int:
        return len(self.children)

    def __repr__(self) -> str:
        if not self.children:
            return "∅"
        return "{" + ", ".join(repr(c) for c in self.children) + "}"

    def to_sexp(self) -> str:
        return "(hf" + "".join(" " + c.to_sexp() for c in self.children) + ")"


def hf_cmp(a: HFSet, b: HFSet) -> int:
    """The canonical total order: by rank, then lexicographically on children."""
    if a is b:
        return 0
    if a.rank != b.rank:
        return -1 if a.rank < b.rank else 1
    for x, y in zip(a.children, b.children):
        c = hf_cmp(x, y)
        if c:
            return c
    return -1 if len(a.children) < len(b.children) else 1


_sort_key = functools.cmp_to_key(hf_cmp)


def hf_make(children: Iterable[HFSet] = ()) -> HFSet:
    """Return the canonical set with the given children (order and duplicates ignored)."""
    uniq = sorted(set(children), key=lambda c: c.key)
    tup = tuple(uniq)
    cached = _intern.get(tup)
    if cached is not None:
        return cached
    rank = 0 if not tup else 1 + max(c.rank for c in tup)
    hash_ = hash((rank, tuple(c._hash for c in tup)))
    made = HFSet(tup, rank, hash_)
    _intern[tup] = made
    return made


EMPTY = hf_make()


def hf_rank(x: HFSet) -> int:
    return x.rank


def hf_pair(a: HFSet, b: HFSet) -> HFSet:
    """Kuratowski pair {{a}, {a, b}}."""
    return hf_make([hf_make([a]), hf_make([a, b])])


def hf_unpair(x: HFSet) -> tuple[HFSet, HFSet] | None:
    """Invert hf_pair, or None if x is not a Kuratowski pair."""
    if len(x) == 1:
        (inner,) = x.children
        if len(inner) == 1:
            return inner.children[0], inner.children[0]
        return None
    if len(x) == 2:
        small, big = sorted(x.children, key=len)
        if len(small) == 1 and len(big) == 2:
            a = small.children[0]
            rest = [c for c in big.children if c is not a]
            if len(rest) == 1 and a in big:
                return a, rest[0]
        return None
    return None


def hf_list(items: Iterable[HFSet]) -> HFSet:
    """Right-nested pair encoding of a finite sequence; the empty list is ∅."""
    out = EMPTY
    for item in reversed(list(items)):
        out = hf_pair(item, out)
    return out


def hf_unlist(x: HFSet) -> list[HFSet] | None:
    out: list[HFSet] = []
    while x is not EMPTY:
        p = hf_unpair(x)
        if p is None:
            return None
        out.append(p[0])
        x = p[1]
    return out


def v_stage(n: int, cap: int = STAGE_CAP) -> list[HFSet]:
    """All sets of rank < n, in canonical order.  Refused above the stage cap."""
    if n > cap:
        raise BudgetError(f"stage {n} exceeds cap {cap} (|V_{cap}| = 2^{2 ** (cap - 1)})")
    stage: list[HFSet] = []
    for _ in range(n):
        stage = [hf_make(sub) for sub in _subsets(stage)]
    return sorted(stage, key=lambda s: s.key)


def _subsets(xs: list[HFSet]) -> Iterator[tuple[HFSet, ...]]:
    for mask in range(1 << len(xs)):
        yield tuple(xs[i] for i in range(len(xs)) if mask >> i & 1)


_nat_cache: list[HFSet] = [EMPTY]


def nat_encode(k: int) -> HFSet:
    """The von Neumann ordinal k."""
    while len(_nat_cache) <= k:
        _nat_cache.append(hf_make(_nat_cache))
    return _nat_cache[k]


def nat_decode(x: HFSet) -> int | None:
    """Invert nat_encode; None when x is not a von Neumann natural."""
    k = len(x)
    return k if nat_encode(k) is x else None


def transitive_closure(xs: Iterable[HFSet]) -> list[HFSet]:
    """All members-of-members-of... of the given sets, including the sets themselves."""
    seen: set[HFSet] = set()
    work = list(xs)
    while work:
        x = work.pop()
        if x not in seen:
            seen.add(x)
            work.extend(x.children)
    return sorted(seen, key=lambda s: s.key)
