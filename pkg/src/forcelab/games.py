"""Finite clopen games: ranking, back-propagation solving, strategy
verification, and the interrogator/truth-teller game over a finite
structure.

Player I moves first at the root of the truth-telling game and plays the
interrogator; player II is the truth-teller.  The interrogator's clock
value strictly descends, so the game is finite; the truth-teller loses as
soon as her declarations explicitly violate a Tarskian clause instance.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import etr as etr_mod
from . import sexpr
from .errors import BudgetError, ForcelabError, ParseError
from .formulas import (And, AtomTr, Exists, Forall, Formula, Not, Or)
from .hfset import HFSet, nat_encode
from .truth import FiniteStructure, _val_key, eval_formula

GAME_BUDGET = 300_000


@dataclass
class GameNode:
    ident: int
    mover: str | None          # "I" | "II" | None at terminals
    children: tuple[int, ...]
    winner: str | None = None  # set at terminals
    note: dict = field(default_factory=dict)


class GameTree:
    def __init__(self, nodes: dict[int, GameNode], root: int):
        self.nodes = nodes
        self.root = root
        self._validate()

    def _validate(self):
        seen: set[int] = set()
        stack = [self.root]
        while stack:
            i = stack.pop()
            if i in seen:
                raise ForcelabError("game graph revisits a node; trees only")
            seen.add(i)
            node = self.nodes[i]
            if node.children:
                if node.mover not in ("I", "II"):
                    raise ForcelabError(f"internal node {i} needs a mover")
                stack.extend(node.children)
            else:
                if node.winner not in ("I", "II"):
                    raise ForcelabError(f"terminal node {i} needs a winner")
        self._reachable = seen

    def __len__(self) -> int:
        return len(self._reachable)

    def terminals(self) -> list[int]:
        return [i for i in self._reachable if not self.nodes[i].children]

    def to_sexp(self) -> str:
        forms = ["game"]
        for i in sorted(self._reachable):
            n = self.nodes[i]
            if n.children:
                forms.append(["node", str(i), ["mover", n.mover],
                              ["children", *(str(c) for c in n.children)]])
            else:
                forms.append(["terminal", str(i), ["winner", n.winner]])
        forms.append(["root", str(self.root)])
        return sexpr.show(forms)


def parse_game(text: str) -> GameTree:
    form = sexpr.read(text)
    if not isinstance(form, list) or not form or form[0] != "game":
        raise ParseError("expected (game ...)")
    nodes: dict[int, GameNode] = {}
    root = None
    for clause in form[1:]:
        if not isinstance(clause, list) or not clause:
            raise ParseError("bad game clause")
        head = clause[0]
        if head == "node":
            ident = int(clause[1])
            mover = None
            children: tuple[int, ...] = ()
            for part in clause[2:]:
                if part[0] == "mover":
                    mover = part[1]
                elif part[0] == "children":
                    children = tuple(int(c) for c in part[1:])
            nodes[ident] = GameNode(ident, mover, children)
        elif head == "terminal":
            ident = int(clause[1])
            winner = None
            for part in clause[2:]:
                if part[0] == "winner":
                    winner = part[1]
            nodes[ident] = GameNode(ident, None, (), winner)
        elif head == "root":
            root = int(clause[1])
        else:
            raise ParseError(f"unknown game clause {head!r}")
    if root is None:
        raise ParseError("game needs a (root ...) clause")
    return GameTree(nodes, root)


def _postorder(T: GameTree) -> list[int]:
    order: list[int] = []
    stack: list[tuple[int, bool]] = [(T.root, False)]
    while stack:
        i, expanded = stack.pop()
        if expanded:
            order.append(i)
        else:
            stack.append((i, True))
            for c in T.nodes[i].children:
                stack.append((c, False))
    return order


def continuous_rank(T: GameTree) -> dict[int, int]:
    """Terminals get 0; every parent gets one more than its highest child."""
    rank: dict[int, int] = {}
    for i in _postorder(T):
        node = T.nodes[i]
        rank[i] = 0 if not node.children else 1 + max(rank[c] for c in node.children)
    return rank


@dataclass
class ZermeloResult:
    labels: dict[int, str]
    strategy_I: dict[int, int]
    strategy_II: dict[int, int]

    def strategy(self, player: str) -> dict[int, int]:
        return self.strategy_I if player == "I" else self.strategy_II


def zermelo_solve(T: GameTree) -> ZermeloResult:
    """Label every node with the player who can force a win from it, by
    back-propagation from the terminals; the winner's strategy stays on the
    winner's labels."""
    labels: dict[int, str] = {}
    strat = {"I": {}, "II": {}}
    for i in _postorder(T):
        node = T.nodes[i]
        if not node.children:
            labels[i] = node.winner
            continue
        mover = node.mover
        mine = [c for c in node.children if labels[c] == mover]
        labels[i] = mover if mine else _other(mover)
        strat[mover][i] = mine[0] if mine else node.children[0]
    return ZermeloResult(labels, strat["I"], strat["II"])


def _other(player: str) -> str:
    return "II" if player == "I" else "I"


def verify_strategy(T: GameTree, strategy: dict[int, int], player: str
                    ) -> tuple[bool, list[int] | None]:
    """Play the strategy against every opposing line; the verdict is whether
    every reached terminal is a win for the player."""
    stack: list[list[int]] = [[T.root]]
    while stack:
        line = stack.pop()
        node = T.nodes[line[-1]]
        if not node.children:
            if node.winner != player:
                return False, line
            continue
        if node.mover == player:
            choice = strategy.get(line[-1])
            if choice is None or choice not in node.children:
                return False, line
            stack.append(line + [choice])
        else:
            for c in node.children:
                stack.append(line + [c])
    return True, None


def zermelo_recursion_instance(T: GameTree):
    """The labeling as a staged recursion on node rank: the slice holds the
    nodes labeled for player I."""
    rank = continuous_rank(T)
    codec = {nat_encode(i): i for i in T._reachable}
    enc_of = {i: e for e, i in codec.items()}
    length = max(rank.values()) + 1

    def step(x: HFSet, alpha: int, view, _param) -> bool:
        i = codec[x]
        if rank[i] != alpha:
            return False
        node = T.nodes[i]
        if not node.children:
            return node.winner == "I"
        child_is_I = [view(rank[c], enc_of[c]) for c in node.children]
        if node.mover == "I":
            return any(child_is_I)
        return all(child_is_I)

    inst = etr_mod.RecursionInstance(
        length=length, domain=tuple(sorted(codec, key=lambda e: e.key)),
        step=step, label="zermelo-labels")
    return inst, codec


def random_game_tree(rng: random.Random, max_nodes: int = 200) -> GameTree:
    """A random finite game tree within the node budget."""
    nodes: dict[int, GameNode] = {}
    next_id = itertools.count()
    root = next(next_id)
    frontier = [(root, 0)]
    total = 1
    while frontier:
        ident, depth = frontier.pop()
        make_terminal = total >= max_nodes or depth > 8 or rng.random() < 0.25
        if make_terminal:
            nodes[ident] = GameNode(ident, None, (), rng.choice(["I", "II"]))
            continue
        width = rng.randint(1, 3)
        width = min(width, max_nodes - total)
        if width <= 0:
            nodes[ident] = GameNode(ident, None, (), rng.choice(["I", "II"]))
            continue
        kids = tuple(next(next_id) for _ in range(width))
        total += width
        nodes[ident] = GameNode(ident, rng.choice(["I", "II"]), kids)
        for k in kids:
            frontier.append((k, depth + 1))
    return GameTree(nodes, root)


# ---------------------------------------------------------------------------
# The truth-telling game.

def _pool_instances(M: FiniteStructure, pool: Sequence[Formula]):
    out = []
    for phi in pool:
        fv = tuple(sorted(phi.free))
        for values in itertools.product(M.domain, repeat=len(fv)):
            out.append((phi, dict(zip(fv, values))))
    return out


def _violates(M: FiniteStructure, history: dict) -> bool:
    """True when the declarations made so far explicitly break a Tarskian
    clause instance: a wrong atomic verdict, an inconsistent connective, or
    a fully-instantiated quantifier mismatch."""
    def declared(phi: Formula, v: dict):
        return history.get((phi, _val_key(phi, v)))

    for (phi, key), verdict in history.items():
        v = dict(key)
        if phi.rank == 0 and not isinstance(phi, AtomTr):
            if verdict != eval_formula(M, phi, v):
                return True
        elif isinstance(phi, Not):
            sub = declared(phi.sub, v)
            if sub is not None and sub == verdict:
                return True
        elif isinstance(phi, (And, Or)):
            votes = [declared(s, v) for s in phi.subs]
            if all(x is not None for x in votes):
                combined = all(votes) if isinstance(phi, And) else any(votes)
                if combined != verdict:
                    return True
            if isinstance(phi, And) and verdict and any(x is False for x in votes):
                return True
            if isinstance(phi, Or) and not verdict and any(x is True for x in votes):
                return True
        elif isinstance(phi, (Forall, Exists)):
            votes = []
            for values in itertools.product(M.domain, repeat=len(phi.vars)):
                inst = dict(v)
                inst.update(zip(phi.vars, values))
                votes.append(declared(phi.body, inst))
            if all(x is not None for x in votes):
                combined = all(votes) if isinstance(phi, Forall) else any(votes)
                if combined != verdict:
                    return True
            if isinstance(phi, Forall) and verdict and any(x is False for x in votes):
                return True
            if isinstance(phi, Exists) and not verdict and any(x is True for x in votes):
                return True
    return False


def truth_telling_game(M: FiniteStructure, pool: Sequence[Formula], clock: int,
                       budget: int = GAME_BUDGET) -> GameTree:
    """Build the finite interrogation game over the structure and pool.

    Interrogator moves pick a pool instance and a strictly smaller clock
    value; the truth-teller answers with a verdict, supplying a witness
    whenever she declares an existential true.  Running out of clock loses
    for the interrogator; an explicit Tarskian violation loses for the
    truth-teller.
    """
    instances = _pool_instances(M, pool)
    nodes: dict[int, GameNode] = {}
    counter = itertools.count()

    def new_node() -> int:
        ident = next(counter)
        if ident >= budget:
            raise BudgetError(f"truth-telling game exceeds {budget} nodes "
                              f"(pool {len(instances)} instances, clock {clock})")
        return ident

    def interrogator_node(clock_now: int, history: dict) -> int:
        ident = new_node()
        if clock_now == 0:
            nodes[ident] = GameNode(ident, None, (), "II",
                                    {"role": "clock-exhausted"})
            return ident
        kids = []
        for phi, v in instances:
            for smaller in range(clock_now):
                kids.append(teller_node(phi, v, smaller, history))
        nodes[ident] = GameNode(ident, "I", tuple(kids),
                                note={"role": "interrogator", "clock": clock_now})
        return ident

    def teller_node(phi: Formula, v: dict, clock_next: int, history: dict) -> int:
        ident = new_node()
        kids = []
        for verdict in (True, False):
            if verdict and isinstance(phi, Exists):
                for values in itertools.product(M.domain, repeat=len(phi.vars)):
                    inst = dict(v)
                    inst.update(zip(phi.vars, values))
                    kids.append(declaration_node(
                        phi, v, verdict, clock_next, history,
                        extra=(phi.body, inst)))
            else:
                kids.append(declaration_node(phi, v, verdict, clock_next, history))
        nodes[ident] = GameNode(ident, "II", tuple(kids),
                                note={"role": "truth-teller",
                                      "challenge": (phi, _val_key(phi, v)),
                                      "clock": clock_next})
        return ident

    def declaration_node(phi: Formula, v: dict, verdict: bool, clock_next: int,
                         history: dict, extra=None) -> int:
        new_history = dict(history)
        contradiction = False
        for f, val, verd in [(phi, v, verdict)] + (
                [(extra[0], extra[1], True)] if extra else []):
            key = (f, _val_key(f, val))
            if key in new_history and new_history[key] != verd:
                contradiction = True
            new_history[key] = verd
        if contradiction or _violates(M, new_history):
            ident = new_node()
            nodes[ident] = GameNode(ident, None, (), "I",
                                    {"role": "violation",
                                     "verdict": verdict,
                                     "challenge": (phi, _val_key(phi, v))})
            return ident
        ident = interrogator_node(clock_next, new_history)
        nodes[ident].note.setdefault("verdict", verdict)
        nodes[ident].note.setdefault("challenge", (phi, _val_key(phi, v)))
        return ident

    root = interrogator_node(clock, {})
    return GameTree(nodes, root)


def extract_verdicts(T: GameTree, strategy_II: dict[int, int],
                     pool_instances: Iterable[tuple[Formula, dict]]) -> dict:
    """Read off the verdict the strategy gives to each instance when it is
    asked first, with the most generous remaining clock."""
    root = T.nodes[T.root]
    best: dict = {}
    for child in root.children:
        teller = T.nodes[child]
        challenge = teller.note.get("challenge")
        clock_next = teller.note.get("clock", -1)
        if challenge is None:
            continue
        seen = best.get(challenge)
        if seen is None or clock_next > seen[0]:
            reply = strategy_II.get(child)
            if reply is None:
                continue
            verdict = T.nodes[reply].note.get("verdict")
            best[challenge] = (clock_next, verdict)
    out = {}
    for phi, v in pool_instances:
        key = (phi, _val_key(phi, v))
        if key in best:
            out[key] = best[key][1]
    return out
