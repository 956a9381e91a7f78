import pytest

from app.atoms import AtomSort
from app.kripke import (
    builtin, disjoint_union, load_model, parse_builtin_spec, parse_model, parse_state,
    pred_set, print_model, restrict_states, successors,
)
from app.orbits import Element, OrbitSet
from app.utils import InputError, NotFoundError, ValidationError

STAR = """
atoms equality
state Star()
state Leaf(a)
trans Star() -> Leaf(a)
label Leaf(a) : p(a)
"""


class TestModelDsl:
    """模型 DSL 的解析与打印"""

    def test_01_star_has_two_state_orbits(self):
        m = parse_model(STAR)
        assert len(m.states) == 2
        assert len(m.trans) == 1
        assert len(m.sat) == 1

    def test_02_print_then_parse_is_stable(self):
        """打印结果再解析得到同一个模型"""
        m = parse_model(STAR)
        again = parse_model(print_model(m))
        assert again.states.orbits == m.states.orbits
        assert again.trans.pairs == m.trans.pairs
        assert again.sat.pairs == m.sat.pairs
        assert print_model(again) == print_model(m)

    def test_03_transition_outside_states_rejected(self):
        with pytest.raises(ValidationError):
            parse_model("atoms equality\nstate A()\ntrans A() -> B()\n")

    def test_04_syntax_error_reports_position(self):
        with pytest.raises(InputError) as info:
            parse_model("atoms equality\nstate A(\n")
        assert "语法错误" in info.value.message

    def test_05_constants_in_terms(self):
        """项中出现常量等价于等式约束"""
        m = parse_model("atoms equality\nconst c = 1\nstate A(x)\nlabel A(x) : p(c)\n")
        assert len(m.states) == 2
        assert len(m.sat) == 2

    def test_06_variable_clashing_with_constant_rejected(self):
        with pytest.raises(InputError):
            parse_model("atoms equality\nconst c = 1\nstate A(c)\n")


class TestStates:
    """具体状态与谓词集合"""

    def test_01_parse_state(self):
        assert parse_state("Leaf(3)", AtomSort.EQUALITY) == Element("Leaf", (3,))
        assert parse_state("Star()", AtomSort.EQUALITY) == Element("Star")
        assert parse_state("Star", AtomSort.EQUALITY) == Element("Star")

    def test_02_unknown_state(self):
        m = parse_model(STAR)
        with pytest.raises(NotFoundError):
            m.element(Element("Nope"))
        with pytest.raises(NotFoundError):
            m.element(Element("Leaf", (1, 2)))

    def test_03_pred_set_of_leaf(self):
        m = parse_model(STAR)
        assert len(pred_set(m, Element("Leaf", (3,)))) == 1
        assert len(pred_set(m, Element("Star"))) == 0

    def test_04_transitions(self):
        m = parse_model(STAR)
        assert m.has_transition(Element("Star"), Element("Leaf", (9,)))
        assert not m.has_transition(Element("Leaf", (9,)), Element("Star"))

    def test_05_successors(self):
        m = parse_model(STAR)
        star = OrbitSet(m.ctx, (m.element(Element("Star")),))
        assert [o.tag for o in successors(m, star)] == ["Leaf"]


class TestBuiltins:
    """内置模型"""

    def test_01_spec_parsing(self):
        assert parse_builtin_spec("freshpath(3, 2, check)") == ("freshpath", (3, 2, "check"))
        assert parse_builtin_spec("star") == ("star", ())

    def test_02_load_builtin(self):
        m = load_model("builtin:star")
        assert m.name == "star"
        assert len(m.states) == 2

    def test_03_unknown_builtin(self):
        with pytest.raises(NotFoundError):
            builtin("nope")

    def test_04_missing_file(self):
        with pytest.raises(NotFoundError):
            load_model("/nonexistent/model.km")

    def test_05_freshpath_state_tags(self):
        """K 含 Q_0 一组，Ǩ 不含"""
        k = builtin("freshpath", 3, 2)
        check = builtin("freshpath", 3, 2, "check")
        assert len({o.tag for o in k.states}) == 3 + 12 + 1
        assert len({o.tag for o in check.states}) == 3 + 9 + 1
        assert k.ctx == check.ctx

    def test_06_parameter_validation(self):
        with pytest.raises(InputError):
            builtin("freshpath", 2, 2)
        with pytest.raises(InputError):
            builtin("chain", 2, 1)
        with pytest.raises(InputError):
            builtin("infsucc", 0)

    def test_07_increasing_is_ordered(self):
        m = builtin("increasing")
        assert m.sort is AtomSort.ORDERED
        assert len(m.states) == 1


class TestCombinators:
    """不交并与子模型"""

    def test_01_disjoint_union_prefixes_states(self):
        m = parse_model(STAR)
        u = disjoint_union(m, m)
        assert {o.tag for o in u.states} == {"L_Star", "L_Leaf", "R_Star", "R_Leaf"}
        assert {p.right for p in u.sat} == {"p"}

    def test_02_disjoint_union_needs_same_context(self):
        with pytest.raises(InputError):
            disjoint_union(parse_model(STAR), builtin("infsucc", 1))

    def test_03_restrict_states_drops_transitions(self):
        m = parse_model(STAR)
        leaves = OrbitSet(m.ctx, tuple(o for o in m.states if o.tag == "Leaf"))
        sub = restrict_states(m, leaves)
        assert len(sub.states) == 1
        assert len(sub.trans) == 0
        assert len(sub.sat) == 1
