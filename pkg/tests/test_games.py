import random

import pytest

from forcelab import (BudgetError, FiniteStructure, GameNode, GameTree,
                      atom_eq, atom_in, continuous_rank, etr_solve,
                      eval_formula, exists, extract_verdicts, not_, parse_game,
                      random_game_tree, truth_telling_game, v_stage, var,
                      verify_strategy, zermelo_recursion_instance,
                      zermelo_solve, verify_solution)
from forcelab.games import _pool_instances
from forcelab.truth import _val_key


def leaf(i, winner):
    return GameNode(i, None, (), winner)


def test_rank_examples():
    single = GameTree({0: leaf(0, "I")}, 0)
    assert continuous_rank(single) == {0: 0}
    two = GameTree({0: GameNode(0, "I", (1, 2)), 1: leaf(1, "I"), 2: leaf(2, "II")}, 0)
    assert continuous_rank(two)[0] == 1


def test_ranks_strictly_decrease():
    rng = random.Random(0)
    for _ in range(30):
        T = random_game_tree(rng, 500)
        rank = continuous_rank(T)
        for nid in T._reachable:
            for child in T.nodes[nid].children:
                assert rank[child] < rank[nid]


def test_zermelo_immediate_win():
    T = GameTree({0: GameNode(0, "I", (1, 2)), 1: leaf(1, "I"), 2: leaf(2, "II")}, 0)
    res = zermelo_solve(T)
    assert res.labels[0] == "I"
    assert res.strategy_I[0] == 1


def test_zermelo_forced_loss():
    # every move of player I meets a winning reply by player II
    nodes = {0: GameNode(0, "I", (1, 2)),
             1: GameNode(1, "II", (3,)), 2: GameNode(2, "II", (4,)),
             3: leaf(3, "II"), 4: leaf(4, "II")}
    res = zermelo_solve(GameTree(nodes, 0))
    assert res.labels[0] == "II"


def test_labels_are_a_fixpoint_and_relabeling_breaks_it():
    rng = random.Random(1)
    for _ in range(40):
        T = random_game_tree(rng, 50)
        res = zermelo_solve(T)
        for nid in T._reachable:
            node = T.nodes[nid]
            if not node.children:
                assert res.labels[nid] == node.winner
                continue
            mine = [c for c in node.children if res.labels[c] == node.mover]
            want = node.mover if mine else ("II" if node.mover == "I" else "I")
            assert res.labels[nid] == want
            assert res.labels[nid] != ("II" if want == "I" else "I")


def test_winner_strategy_survives_all_play():
    rng = random.Random(2)
    for _ in range(200):
        T = random_game_tree(rng, 120)
        res = zermelo_solve(T)
        winner = res.labels[T.root]
        ok, line = verify_strategy(T, res.strategy(winner), winner)
        assert ok, line


def test_loser_strategy_is_refuted():
    rng = random.Random(3)
    refuted = 0
    for _ in range(200):
        T = random_game_tree(rng, 120)
        res = zermelo_solve(T)
        loser = "II" if res.labels[T.root] == "I" else "I"
        ok, line = verify_strategy(T, res.strategy(loser), loser)
        if not ok:
            refuted += 1
            assert line is not None
    assert refuted > 0


def test_labels_invariant_under_child_permutation():
    rng = random.Random(4)
    for _ in range(30):
        T = random_game_tree(rng, 60)
        permuted = {}
        for nid, node in T.nodes.items():
            kids = list(node.children)
            rng.shuffle(kids)
            permuted[nid] = GameNode(nid, node.mover, tuple(kids), node.winner)
        T2 = GameTree(permuted, T.root)
        r1, r2 = zermelo_solve(T), zermelo_solve(T2)
        assert r1.labels == r2.labels
        for player in ("I", "II"):
            ok1, _ = verify_strategy(T, r1.strategy(player), player)
            ok2, _ = verify_strategy(T2, r2.strategy(player), player)
            assert ok1 == ok2


def test_zermelo_as_recursion_instance():
    rng = random.Random(5)
    for _ in range(20):
        T = random_game_tree(rng, 50)
        inst, codec = zermelo_recursion_instance(T)
        sol = etr_solve(inst)
        assert verify_solution(inst, sol) == (True, None)
        labels = zermelo_solve(T).labels
        for enc, nid in codec.items():
            assert any(enc in sl for sl in sol.slices) == (labels[nid] == "I")


def test_game_sexp_roundtrip():
    T = GameTree({0: GameNode(0, "I", (1, 2)), 1: leaf(1, "I"), 2: leaf(2, "II")}, 0)
    again = parse_game(T.to_sexp())
    assert again.root == 0
    assert again.nodes[0].children == (1, 2)
    assert again.nodes[2].winner == "II"


# --- truth-telling -----------------------------------------------------------

def _atomic_pool():
    x, y = var("x"), var("y")
    return [atom_in(x, y), not_(atom_in(x, y)), atom_eq(x, y), not_(atom_eq(x, y))]


def test_interrogator_never_wins():
    M = FiniteStructure(v_stage(2))
    for clock in (1, 2, 3):
        T = truth_telling_game(M, _atomic_pool(), clock)
        res = zermelo_solve(T)
        assert res.labels[T.root] == "II"
        ok, _ = verify_strategy(T, res.strategy_II, "II")
        assert ok


def test_extracted_verdicts_match_truth_at_sufficient_clock():
    M = FiniteStructure(v_stage(2))
    pool = _atomic_pool()
    instances = _pool_instances(M, pool)
    for clock in (1, 2, 3):
        T = truth_telling_game(M, pool, clock)
        res = zermelo_solve(T)
        verdicts = extract_verdicts(T, res.strategy_II, instances)
        for phi, v in instances:
            if phi.rank <= clock - 1:
                assert verdicts[(phi, _val_key(phi, v))] == eval_formula(M, phi, v)


def test_atomic_lie_loses_within_clock_two():
    M = FiniteStructure(v_stage(2))
    pool = _atomic_pool()
    T = truth_telling_game(M, pool, 2)
    res = zermelo_solve(T)
    liar = dict(res.strategy_II)
    for nid in T._reachable:
        node = T.nodes[nid]
        if node.mover == "II":
            phi, key = node.note["challenge"]
            if phi.rank == 0:
                wrong = not eval_formula(M, phi, dict(key))
                for child in node.children:
                    if T.nodes[child].note.get("verdict") == wrong:
                        liar[nid] = child
                        break
    ok, line = verify_strategy(T, liar, "II")
    assert not ok and line is not None


def test_existential_challenges_demand_witnesses():
    M = FiniteStructure(v_stage(2))
    x, y = var("x"), var("y")
    pool = [exists(("x",), atom_eq(x, y)), atom_eq(x, y)]
    T = truth_telling_game(M, pool, 2)
    res = zermelo_solve(T)
    assert res.labels[T.root] == "II"


def test_budget():
    M = FiniteStructure(v_stage(2))
    with pytest.raises(BudgetError):
        truth_telling_game(M, _atomic_pool(), 3, budget=100)
