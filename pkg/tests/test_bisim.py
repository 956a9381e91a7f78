import pytest

from app.bisim import (
    BisimKind, BisimMode, build_bisim_game, check_reflexive, check_symmetric, decide_bisimilar,
    decide_bisimilar_across, invariance_check,
)
from app.formulas import builtin_formula, parse_formula
from app.kripke import builtin
from app.orbits import Element
from app.utils import InputError

P, Q = Element("P"), Element("Q")


class TestBisimKind:
    """互模拟类型"""

    def test_01_parse(self):
        assert BisimKind.parse("stack", 2) == BisimKind.stack(2)
        assert BisimKind.parse("full", 1).mode is BisimMode.FULL
        assert str(BisimKind.full(3)) == "full(3)"

    def test_02_unknown_mode(self):
        with pytest.raises(InputError):
            BisimKind.parse("weak", 1)

    def test_03_negative_k(self):
        with pytest.raises(InputError):
            BisimKind.stack(-1)


class TestDecision:
    """互模拟判定"""

    def test_01_infsucc_full_bisimilar(self):
        """两个常量之外的后继与两个常量上的后继在 k = 1 时无法区分"""
        assert decide_bisimilar(builtin("infsucc", 1), P, Q, BisimKind.full(1))

    def test_02_chain_stack_bisimilar(self):
        m = builtin("chain", 3, 1)
        assert decide_bisimilar(m, Element("P_1"), Element("Q_1"), BisimKind.stack(1))

    def test_03_label_mismatch(self):
        """谓词集合不同的初始局面不合法，Duplicator 直接输"""
        m = builtin("star")
        assert not decide_bisimilar(m, Element("Star"), Element("Leaf", (1,)), BisimKind.stack(1))

    def test_04_illegal_start_is_lone_node(self):
        m = builtin("star")
        game, start = build_bisim_game(m, BisimKind.full(0), Element("Star"), Element("Leaf", (1,)))
        assert list(game.nodes) == [start]
        assert not game.moves.pairs

    def test_05_reflexive(self):
        assert check_reflexive(builtin("star"), BisimKind.stack(1))
        assert check_reflexive(builtin("infsucc", 1), BisimKind.full(1))

    def test_06_symmetric(self):
        m = builtin("infsucc", 1)
        assert check_symmetric(m, P, Q, BisimKind.full(1))
        assert check_symmetric(builtin("star"), Element("Star"), Element("Leaf", (2,)), BisimKind.stack(1))

    def test_07_across_models(self):
        m = builtin("star")
        assert decide_bisimilar_across(m, Element("Star"), m, Element("Star"), BisimKind.stack(1))

    def test_08_unknown_state(self):
        with pytest.raises(InputError):
            decide_bisimilar(builtin("star"), Element("Nope"), Element("Star"), BisimKind.stack(1))

    @pytest.mark.slow
    def test_09_infsucc_two(self):
        assert decide_bisimilar(builtin("infsucc", 2), P, Q, BisimKind.full(2))

    @pytest.mark.slow
    def test_10_chain_five(self):
        m = builtin("chain", 5, 2)
        assert decide_bisimilar(m, Element("P_1"), Element("Q_1"), BisimKind.stack(2))


class TestInvariance:
    """互模拟状态在受限公式上取值相同"""

    def test_01_bisimilar_states_agree(self):
        m = builtin("infsucc", 1)
        formulas = [parse_formula("<> (OR a . p(a))"), builtin_formula("dead"), builtin_formula("true")]
        assert invariance_check(m, P, Q, BisimKind.full(1), formulas)

    def test_02_bound_exceeding_k_rejected(self):
        m = builtin("infsucc", 1)
        wide = parse_formula("OR a . OR b . <> (p(a) /\\ p(b))")
        with pytest.raises(InputError):
            invariance_check(m, P, Q, BisimKind.full(1), [wide])

    def test_03_stack_rejects_vectorial(self):
        m = builtin("chain", 3, 1)
        with pytest.raises(InputError):
            invariance_check(m, Element("P_1"), Element("Q_1"), BisimKind.stack(100),
                             [builtin_formula("chain-definer")])


RESTRICTION_CASES = [
    ("infsucc", (1,), "P", "Q", BisimMode.FULL, 0),
    ("infsucc", (1,), "P", "Q", BisimMode.STACK, 0),
    ("chain", (3, 1), "P_1", "Q_1", BisimMode.STACK, 0),
    ("star", (), "Star", "Star", BisimMode.FULL, 1),
    pytest.param("infsucc", (1,), "P", "Q", BisimMode.FULL, 1, marks=pytest.mark.slow),
    pytest.param("infsucc", (1,), "P", "Q", BisimMode.STACK, 1, marks=pytest.mark.slow),
    pytest.param("chain", (3, 1), "P_1", "Q_1", BisimMode.FULL, 0, marks=pytest.mark.slow),
    pytest.param("chain", (3, 1), "P_1", "Q_1", BisimMode.STACK, 1, marks=pytest.mark.slow),
]


class TestRestriction:
    """(k+1)-互模拟蕴含 k-互模拟"""

    @pytest.mark.parametrize("model,params,x,y,mode,k", RESTRICTION_CASES)
    def test_01_larger_k_implies_smaller_k(self, model, params, x, y, mode, k):
        m = builtin(model, *params)
        stronger = decide_bisimilar(m, Element(x), Element(y), BisimKind(mode, k + 1))
        weaker = decide_bisimilar(m, Element(x), Element(y), BisimKind(mode, k))
        assert weaker or not stronger

    @pytest.mark.parametrize("mode", [BisimMode.FULL, BisimMode.STACK])
    def test_02_distinct_leaves(self, mode):
        """不同原子上的叶子在每个 k 下都互模拟"""
        m = builtin("star")
        leaves = Element("Leaf", (1,)), Element("Leaf", (2,))
        verdicts = [decide_bisimilar(m, *leaves, BisimKind(mode, k)) for k in range(3)]
        assert verdicts == [True, True, True]
