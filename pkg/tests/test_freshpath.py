import pytest

from app.freshpath import (
    OracleVerdict, Prefilter, bounded_oracle, cofinite_prefilter, decide_freshpath, khat_orbit_bound,
    state_info,
)
from app.kripke import builtin, load_model, parse_model
from app.orbits import Element
from app.utils import InputError, UnsupportedModelError

LABEL_AFTER_COFINITE = """
atoms equality
const c1 = 1
state Co()
state L()
state Rest()
trans Co() -> L()
trans L() -> Rest()
trans Rest() -> Rest()
label Co() : p(a) where a != c1
label L() : p(c1)
"""

LABEL_BEFORE_COFINITE = """
atoms equality
const c1 = 1
state L()
state Co()
state Rest()
trans L() -> Co()
trans Co() -> Rest()
trans Rest() -> Rest()
label L() : p(c1)
label Co() : p(a) where a != c1
"""

REPEATED_AFTER_COFINITE = """
atoms equality
const c1 = 1
state Co()
state L1()
state L2()
state Rest()
trans Co() -> L1()
trans L1() -> L2()
trans L2() -> Rest()
trans Rest() -> Rest()
label Co() : p(a) where a != c1
label L1() : p(c1)
label L2() : p(c1)
"""

FORGOTTEN_ATOM_REUSED = """
atoms equality
state A(x)
state B()
state Co(y)
state Rest()
trans A(x) -> B()
trans B() -> Co(y)
trans Co(y) -> Rest()
trans Rest() -> Rest()
label A(x) : p(x)
label Co(y) : p(a) where a != y
"""


class TestDecision:
    """#Path 判定"""

    def test_01_fresh_labels_available(self):
        """Q_0 一组用 b_j，整条路径上的原子互不相同"""
        assert decide_freshpath(builtin("freshpath", 3, 2), Element("P_1"))

    def test_02_every_branch_repeats_an_atom(self):
        """Ǩ 中每组 Q_i 在第 i 步重复 a_i"""
        assert not decide_freshpath(builtin("freshpath", 3, 2, "check"), Element("P_1"))

    def test_03_unlabelled_loop(self):
        assert decide_freshpath(builtin("loop"), Element("Loop"))

    def test_04_no_infinite_path(self):
        assert not decide_freshpath(builtin("star"), Element("Star"))

    @pytest.mark.slow
    def test_05_larger_instance(self):
        assert decide_freshpath(builtin("freshpath", 4, 3), Element("P_1"))
        assert not decide_freshpath(builtin("freshpath", 4, 3, "check"), Element("P_1"))


class TestCofinite:
    """谓词余有限的状态"""

    def test_01_path_through_cofinite_state(self):
        m = builtin("cofinite", "found")
        assert cofinite_prefilter(m, Element("Start")) is Prefilter.FOUND_PATH
        assert decide_freshpath(m, Element("Start"))

    def test_02_cycle_of_cofinite_states_excluded(self):
        m = builtin("cofinite", "excluded")
        assert cofinite_prefilter(m, Element("Start")) is Prefilter.EXCLUDED
        assert not decide_freshpath(m, Element("Start"))
        assert not decide_freshpath(m, Element("Co1"))

    def test_03_not_applicable_without_cofinite_states(self):
        assert cofinite_prefilter(builtin("star"), Element("Star")) is Prefilter.NOT_APPLICABLE

    def test_04_state_info_marks_cofinite(self):
        m = builtin("cofinite", "found")
        flags = {o.tag: i.cofinite for o, i in state_info(m).items()}
        assert flags == {"Start": False, "Co": True, "Rest": False}

    def test_05_labelled_state_after_cofinite_state(self):
        """Co 标记 c1 以外的全部原子，L 恰好标记 c1"""
        m = parse_model(LABEL_AFTER_COFINITE)
        assert cofinite_prefilter(m, Element("Co")) is Prefilter.FOUND_PATH
        assert decide_freshpath(m, Element("Co")) is True

    def test_06_labelled_state_before_cofinite_state(self):
        m = parse_model(LABEL_BEFORE_COFINITE)
        assert cofinite_prefilter(m, Element("L")) is Prefilter.FOUND_PATH
        assert decide_freshpath(m, Element("L")) is True
        assert bounded_oracle(m, Element("L")).found

    def test_07_allowed_atom_used_twice(self):
        m = parse_model(REPEATED_AFTER_COFINITE)
        assert cofinite_prefilter(m, Element("Co")) is Prefilter.EXCLUDED
        assert decide_freshpath(m, Element("Co")) is False

    def test_08_earlier_label_inside_cofinite_pred(self):
        """Co 标记全部原子，L 已经用过 c1"""
        m = parse_model(LABEL_BEFORE_COFINITE.replace("p(a) where a != c1", "p(a)"))
        assert cofinite_prefilter(m, Element("L")) is Prefilter.EXCLUDED
        assert decide_freshpath(m, Element("L")) is False

    def test_09_forgotten_atom_becomes_allowed(self):
        """A(x) 标记的 x 离开支撑后，Co(y) 取 y = x 即可避开它"""
        m = parse_model(FORGOTTEN_ATOM_REUSED)
        assert decide_freshpath(m, Element("A", (1,))) is True
        strict = parse_model(FORGOTTEN_ATOM_REUSED.replace("p(a) where a != y", "p(a)"))
        assert decide_freshpath(strict, Element("A", (1,))) is False


class TestLimits:
    """超出判定范围的模型"""

    def test_01_binary_label_unsupported(self):
        m = parse_model("atoms equality\nstate A(a, b)\nlabel A(a, b) : p(a, b)\n")
        with pytest.raises(UnsupportedModelError):
            decide_freshpath(m, Element("A", (1, 2)))

    def test_02_two_label_tags_unsupported(self):
        m = parse_model("atoms equality\nstate A(a)\nlabel A(a) : p(a)\nlabel A(a) : q(a)\n")
        with pytest.raises(UnsupportedModelError):
            state_info(m)

    def test_03_infinite_interval_on_ordered_atoms(self):
        m = parse_model("atoms ordered\nconst l = 1\nstate A()\nlabel A() : p(x) where x > l\n")
        with pytest.raises(UnsupportedModelError):
            decide_freshpath(m, Element("A"))

    def test_04_unsupported_is_input_error(self):
        assert issubclass(UnsupportedModelError, InputError)

    def test_05_khat_orbit_bound(self):
        """Star 无支撑，Leaf(a) 的支撑为 {a}"""
        assert khat_orbit_bound(builtin("star")) == 1 + 2
        assert khat_orbit_bound(builtin("loop")) == 1


class TestOracle:
    """有界搜索只给出正面证据"""

    def test_01_loop_witness(self):
        result = bounded_oracle(builtin("loop"), Element("Loop"))
        assert result.verdict is OracleVerdict.WITNESS
        assert result.path == (Element("Loop"), Element("Loop"))

    def test_02_dead_end_has_no_witness(self):
        assert not bounded_oracle(builtin("star"), Element("Star")).found

    def test_03_path_through_cofinite_element(self):
        result = bounded_oracle(parse_model(LABEL_AFTER_COFINITE), Element("Co"))
        assert result.verdict is OracleVerdict.WITNESS
        assert result.path == (Element("Co"), Element("L"), Element("Rest"), Element("Rest"))

    def test_04_cofinite_element_rejects_used_atoms(self):
        m = parse_model(LABEL_BEFORE_COFINITE.replace("p(a) where a != c1", "p(a)"))
        assert not bounded_oracle(m, Element("L")).found

    @pytest.mark.parametrize("model,state", [
        ("freshpath(3,2,K)", "P_1"), ("freshpath(3,2,check)", "P_1"), ("cofinite(found)", "Start"),
        ("loop", "Loop"), ("star", "Star"),
    ])
    def test_05_witness_implies_decision(self, model, state):
        m = load_model(f"builtin:{model}")
        x = Element(state)
        if bounded_oracle(m, x).found:
            assert decide_freshpath(m, x)
