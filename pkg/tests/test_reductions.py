import pytest

from app.checker import holds
from app.kripke import load_model
from app.reductions import (
    Configuration, Rule, TuringMachine, configurations_to_lasso, fixture_machine, is_ltl_nnf,
    load_machine, ltl_eval_lasso, ltl_to_mu, parse_tm, run_to_lasso, simulate, tm_clause_count,
    tm_clauses, tm_to_ltl,
)
from app.utils import InputError, NotFoundError, UnsupportedModelError

WRITE_ONE = """
states q0 qa
alphabet B 1
init q0
accept qa
rule q0 B -> qa 1 R
"""


class TestMachines:
    """图灵机的解析与运行"""

    def test_01_parse(self):
        tm = parse_tm(WRITE_ONE)
        assert tm.blank == "B"
        assert tm.rules == (Rule("q0", "B", "qa", "1", "R"),)
        assert tm == parse_tm(WRITE_ONE)

    def test_02_fixtures(self):
        assert fixture_machine("write-one") == parse_tm(WRITE_ONE, name="write-one")
        assert load_machine("builtin:walk-right").name == "walk-right"
        with pytest.raises(NotFoundError):
            fixture_machine("nope")

    def test_03_accept_state_has_no_rules(self):
        with pytest.raises(InputError):
            TuringMachine(("q0",), ("B",), "q0", "q0", (Rule("q0", "B", "q0", "B", "R"),))

    def test_04_determinism_required(self):
        rules = (Rule("q0", "B", "qa", "B", "R"), Rule("q0", "B", "qa", "B", "L"))
        with pytest.raises(InputError):
            TuringMachine(("q0", "qa"), ("B",), "q0", "qa", rules)

    def test_05_simulate_write_one(self):
        configs = simulate(fixture_machine("write-one"))
        assert configs == [Configuration("q0", 0, ("B",)), Configuration("qa", 1, ("1",))]

    def test_06_simulate_walk_right(self):
        configs = simulate(fixture_machine("walk-right"))
        assert [c.state for c in configs] == ["q0", "q1", "qa"]
        assert configs[-1] == Configuration("qa", 0, ("1", "1"))

    def test_07_accept_immediately(self):
        assert len(simulate(fixture_machine("accept-now"))) == 1

    def test_08_stuck_machine(self):
        with pytest.raises(InputError):
            simulate(fixture_machine("stuck"))

    def test_09_step_limit(self):
        with pytest.raises(InputError):
            simulate(fixture_machine("walk-right"), max_steps=1)


class TestEncoding:
    """LTL 编码与 M 翻译"""

    def test_01_clause_count(self):
        for name in ("accept-now", "write-one", "walk-right", "stuck"):
            tm = fixture_machine(name)
            assert tm_clause_count(tm) == 15 + len(tm.alphabet) + len(tm.rules)
        assert tm_clause_count(fixture_machine("write-one")) == 15 + 2 + 1

    def test_02_encoding_is_nnf(self):
        assert is_ltl_nnf(tm_to_ltl(fixture_machine("walk-right")))

    @pytest.mark.parametrize("name", ["accept-now", "write-one", "walk-right"])
    def test_03_accepting_run_satisfies_encoding(self, name):
        """接受运行的套索满足编码；M 翻译与直接求值一致"""
        tm = fixture_machine(name)
        run = run_to_lasso(tm, 10)
        ltl = tm_to_ltl(tm)
        assert ltl_eval_lasso(run.model, run.start, ltl)
        assert holds(run.model, run.start, ltl_to_mu(ltl))

    def test_04_truncated_run_is_rejected(self):
        """停在初始格局的套索永远到不了接受状态"""
        tm = fixture_machine("write-one")
        run = configurations_to_lasso(tm, simulate(tm)[:1])
        ltl = tm_to_ltl(tm)
        assert not ltl_eval_lasso(run.model, run.start, ltl)
        assert not holds(run.model, run.start, ltl_to_mu(ltl))

    def test_05_infinite_path_conjunct(self):
        tm = fixture_machine("accept-now")
        run = run_to_lasso(tm)
        assert holds(run.model, run.start, ltl_to_mu(tm_to_ltl(tm), with_infinite_path=True))

    def test_06_lasso_evaluation_needs_plain_states(self):
        with pytest.raises(UnsupportedModelError):
            ltl_eval_lasso(load_model("builtin:star"), None, tm_to_ltl(fixture_machine("accept-now")))


class TestCtlModel:
    """CTL 归约使用的全连通模型"""

    def test_01_state_tags(self):
        """$ 加上 符号 × (状态 ∪ {nohead})"""
        m = load_model("builtin:ctl-tm(write-one)")
        assert len({o.tag for o in m.states}) == 1 + 2 * 3
