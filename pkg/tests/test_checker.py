import random

import pytest

from app.checker import brute_force_eval, eval as eval_formula, eval_nu_by_negation, holds, required_pool
from app.formulas import bekic_single_orbit, builtin_formula, parse_formula
from app.kripke import builtin, load_model, parse_model
from app.orbits import Element, OrbitRelation, PairOrbit
from app.utils import PoolTooSmallError

LIBRARY = ["psi", "P1", "P2", "P1andP2", "infpath", "succ-label", "label-succ", "all-succ",
           "no-label", "reach-label", "all-succ-labeled", "dead", "true"]


def state_env(m, orbits) -> dict:
    """X 的赋值：给定的状态轨道"""
    return {"X": OrbitRelation.of(m.ctx, (PairOrbit("X", 0, o.tag, o.arity, o.type) for o in orbits))}


class TestFixtureTruths:
    """内置模型上的已知真值"""

    def test_01_psi_at_star(self):
        """⋆ 的每个 p(a) 都由恰好标 a 的后继见证"""
        m = builtin("star")
        assert holds(m, Element("Star"), builtin_formula("psi"))
        assert not holds(m, Element("Leaf", (1,)), builtin_formula("psi"))

    def test_02_increasing_satisfies_p1_and_p2(self):
        m = builtin("increasing")
        assert eval_formula(m, builtin_formula("P1andP2")).orbits == m.states.orbits

    def test_03_infinite_path(self):
        assert holds(builtin("loop"), Element("Loop"), builtin_formula("infpath"))
        assert not eval_formula(builtin("star"), builtin_formula("infpath")).orbits

    def test_04_dead_states(self):
        m = builtin("star")
        dead = eval_formula(m, builtin_formula("dead"))
        assert [o.tag for o in dead] == ["Leaf"]

    def test_05_infsucc_definer_on_interval_fan(self):
        """区间那么多个带标后继"""
        m = builtin("interval-fan")
        f = builtin_formula("infsucc-definer", m.sort)
        assert holds(m, Element("Inf"), f)
        assert not holds(m, Element("Fin"), f)

    def test_06_evensucc_definer_on_fans(self):
        f = builtin_formula("evensucc-definer")
        assert holds(builtin("fan", 2), Element("Root"), f)
        assert not holds(builtin("fan", 1), Element("Root"), f)
        assert not holds(builtin("fan", 3), Element("Root"), f)

    def test_07_evensucc_definer_false_on_interval(self):
        m = builtin("interval-fan")
        assert not holds(m, Element("Inf"), builtin_formula("evensucc-definer"))

    def test_08_constants_in_formula(self):
        m = parse_model("atoms equality\nconst c = 1\nstate A(x)\nlabel A(x) : p(x)\n")
        f = parse_formula("p(c)")
        assert holds(m, Element("A", (1,)), f)
        assert not holds(m, Element("A", (2,)), f)


class TestOracle:
    """符号求值与有限池暴力求值一致"""

    @pytest.mark.parametrize("model", ["star", "loop", "infsucc(1)", "cofinite(found)"])
    def test_01_agrees_with_brute_force(self, model):
        m = load_model(f"builtin:{model}")
        for name in LIBRARY:
            f = builtin_formula(name, m.sort)
            assert eval_formula(m, f).orbits == brute_force_eval(m, f).orbits, name

    def test_02_pool_too_small(self):
        m = builtin("star")
        f = builtin_formula("psi")
        with pytest.raises(PoolTooSmallError):
            brute_force_eval(m, f, extra=required_pool(m, f) - 1)

    def test_03_ordered_atoms_have_no_pool(self):
        with pytest.raises(PoolTooSmallError):
            brute_force_eval(builtin("increasing"), builtin_formula("P1"))


class TestFixpoints:
    """不动点计算的交叉校验"""

    @pytest.mark.parametrize("model,name", [("loop", "infpath"), ("increasing", "P1"), ("star", "all-succ-labeled")])
    def test_01_nu_by_negation(self, model, name):
        m = builtin(model)
        f = builtin_formula(name, m.sort)
        assert eval_nu_by_negation(m, f).orbits == eval_formula(m, f).orbits

    def test_02_bekic_preserves_semantics(self):
        m = builtin("increasing")
        f = builtin_formula("vector-increasing", m.sort)
        assert eval_formula(m, bekic_single_orbit(f)).orbits == eval_formula(m, f).orbits

    def test_03_vector_increasing_holds(self):
        """递增模型上存在 p 标记严格递增的无穷路径"""
        m = builtin("increasing")
        assert eval_formula(m, builtin_formula("vector-increasing", m.sort)).orbits == m.states.orbits

    def test_04_chain_bekic(self):
        m = builtin("chain", 3, 1)
        f = builtin_formula("chain-definer")
        assert eval_formula(m, bekic_single_orbit(f)).orbits == eval_formula(m, f).orbits


class TestMonotonicity:
    """放大 X 的赋值不会缩小 X 正出现的公式的值"""

    FORMULAS = ["<> X", "[] X", "X /\\ <> true", "OR a . (p(a) /\\ <> X)",
                "mu Y . X \\/ <> Y", "nu Y . X /\\ <> Y"]

    @pytest.mark.parametrize("model", ["star", "loop", "infsucc(1)", "increasing", "cofinite(found)"])
    def test_01_larger_environment_never_shrinks_value(self, model):
        m = load_model(f"builtin:{model}")
        rng = random.Random(model)
        states = list(m.states.orbits)
        for _ in range(5):
            small = [o for o in states if rng.random() < 0.4]
            large = small + [o for o in states if o not in small and rng.random() < 0.5]
            for text in self.FORMULAS:
                f = parse_formula(text)
                low = eval_formula(m, f, state_env(m, small)).as_frozenset()
                high = eval_formula(m, f, state_env(m, large)).as_frozenset()
                assert low <= high, text

    def test_02_empty_and_full_environment_bounds(self):
        """X 取空集与全集时 ◇X 分别是空集与有后继的状态"""
        m = builtin("star")
        f = parse_formula("<> X")
        assert not eval_formula(m, f, state_env(m, [])).orbits
        assert [o.tag for o in eval_formula(m, f, state_env(m, m.states.orbits))] == ["Star"]
