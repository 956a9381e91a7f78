import random

import pytest

from app.formulas import builtin_formula, parse_formula
from app.games import (
    EXISTS, FORALL, OrbitGame, adequacy_check, build_eval_game, check_quotient_bisimulation,
    check_winner_invariance, pairs_game, parse_game, print_game, quotient, random_game,
    solve_finite, winners,
)
from app.kripke import builtin
from app.utils import InputError, ValidationError


class TestFiniteSolver:
    """有限奇偶博弈"""

    def test_01_odd_self_loop_goes_to_forall(self):
        og = OrbitGame((0,), frozenset({0}), ((0,),), (1,))
        assert solve_finite(og).winner(0) == FORALL

    def test_02_even_self_loop_goes_to_exists(self):
        og = OrbitGame((0,), frozenset(), ((0,),), (2,))
        assert solve_finite(og).winner(0) == EXISTS

    def test_03_dead_end_owner_loses(self):
        """无路可走的一方输"""
        og = OrbitGame((0, 1), frozenset({0}), ((), ()), (0, 0))
        solution = solve_finite(og)
        assert solution.winner(0) == FORALL
        assert solution.winner(1) == EXISTS

    def test_04_max_priority_decides(self):
        """0 -> 1 -> 0 的环上最大优先级为 3，∀ 胜"""
        og = OrbitGame((0, 1), frozenset({0, 1}), ((1,), (0,)), (2, 3))
        solution = solve_finite(og)
        assert solution.exists == frozenset()
        assert solution.forall == frozenset({0, 1})

    def test_05_exists_chooses_even_cycle(self):
        og = OrbitGame((0, 1, 2), frozenset({0}), ((1, 2), (1,), (2,)), (0, 1, 2))
        solution = solve_finite(og)
        assert solution.winner(0) == EXISTS
        assert solution.strategy[0] == 2

    def test_06_regions_partition_nodes(self):
        og = OrbitGame((0, 1, 2), frozenset({1}), ((1,), (0, 2), (2,)), (1, 0, 1))
        solution = solve_finite(og)
        assert solution.exists | solution.forall == {0, 1, 2}
        assert not solution.exists & solution.forall


class TestAtomicGames:
    """原子博弈与商博弈"""

    def test_01_pairs_game_quotient(self):
        """对与原子各只有一个轨道"""
        og, index = quotient(pairs_game())
        assert len(og) == 2
        assert len(index) == 2

    def test_02_pairs_game_winners(self):
        """所有秩为 0，∃ 处处获胜"""
        g = pairs_game()
        exists, forall = winners(g)
        assert exists.orbits == g.nodes.orbits
        assert not forall.orbits

    def test_03_pairs_game_quotient_is_bisimulation(self):
        g = pairs_game()
        assert check_quotient_bisimulation(g)
        assert check_winner_invariance(g)

    def test_04_print_parse_stable(self):
        g = pairs_game()
        again = parse_game(print_game(g))
        assert again.nodes.orbits == g.nodes.orbits
        assert again.moves.pairs == g.moves.pairs
        assert print_game(again) == print_game(g)

    def test_05_conflicting_ranks_rejected(self):
        text = "atoms equality\nnode A(a)\nrank 1 A(a)\nrank 2 A(b)\n"
        with pytest.raises(ValidationError):
            parse_game(text)

    def test_06_labels_rejected(self):
        text = "atoms equality\nnode A(a)\nlabel A(a) : p(a)\n"
        with pytest.raises(InputError):
            parse_game(text)

    def test_07_move_outside_nodes_rejected(self):
        with pytest.raises(ValidationError):
            parse_game("atoms equality\nnode A()\nedge A() -> B()\n")

    @pytest.mark.parametrize("seed", range(20))
    def test_08_random_games_winner_invariance(self, seed):
        """具体化博弈中每个结点的胜者与其轨道一致"""
        g = random_game(random.Random(seed), constants=1, max_rank=3)
        assert check_quotient_bisimulation(g)
        assert check_winner_invariance(g)


class TestEvaluationGame:
    """求值博弈与模型检测的一致性"""

    @pytest.mark.parametrize("model,name", [
        ("star", "psi"), ("loop", "infpath"), ("increasing", "P1"), ("star", "dead"),
    ])
    def test_01_adequacy(self, model, name):
        m = builtin(model)
        assert adequacy_check(m, builtin_formula(name, m.sort))

    def test_02_requires_nnf(self):
        with pytest.raises(InputError):
            build_eval_game(builtin("star"), parse_formula("~ <> true"))
