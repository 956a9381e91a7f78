import pytest

from app.atoms import AtomSort
from app.formulas import (
    FORMULA_SOURCES, And, Box, Diamond, Not, Or, Pred, Var, alternation_depth, builtin_formula,
    fix_rank, formula_support, free_variables, global_support_bound, has_vectorial, is_nnf, mu,
    nnf, nu, parse_formula, print_formula, subformula_count,
)
from app.utils import InputError, NotFoundError, ValidationError


class TestParsing:
    """公式 DSL"""

    def test_01_scalar_fixpoint(self):
        f = parse_formula("nu X . <> X")
        assert f == nu("X", Diamond(Var("X")))

    def test_02_predicates_and_variables(self):
        """小写开头是谓词，大写开头是不动点变量"""
        f = parse_formula("mu X . (p(a) \\/ <> X)")
        assert f == mu("X", Or(Pred("p", ("a",)), Diamond(Var("X"))))

    def test_03_negative_occurrence_rejected(self):
        with pytest.raises(ValidationError):
            parse_formula("mu X . ~X")

    def test_04_double_negation_is_positive(self):
        parse_formula("mu X . ~~X")

    def test_05_syntax_error(self):
        with pytest.raises(InputError):
            parse_formula("<> (p(a)")

    def test_06_print_parse_stable(self):
        """打印后再解析不改变库中任何公式"""
        for name in FORMULA_SOURCES:
            f = builtin_formula(name)
            assert parse_formula(print_formula(f)) == f, name

    def test_07_vector_entry_arity_checked(self):
        with pytest.raises(ValidationError):
            parse_formula("nu X(a) { X(b, c) := true }")

    def test_08_repeated_atom_binders_renamed(self):
        """同名原子绑定被改为互不相同的名字"""
        f = parse_formula("(OR a . p(a)) /\\ (OR a . q(a))")
        assert isinstance(f, And)
        assert f.left.vars != f.right.vars


class TestAnalysis:
    """静态分析"""

    def test_01_free_fixpoint_variables(self):
        assert free_variables(parse_formula("mu X . <> X")) == set()
        assert free_variables(Diamond(Var("X"))) == {"X"}

    def test_02_support_is_mentioned_constants(self):
        assert formula_support(parse_formula("p(c) /\\ (OR a . q(a, d))")) == ("c", "d")
        assert formula_support(builtin_formula("psi")) == ()

    def test_03_alternation_depth(self):
        nested = nu("X", mu("Y", Or(Diamond(Var("X")), Diamond(Var("Y")))))
        same = mu("X", mu("Y", Or(Diamond(Var("X")), Diamond(Var("Y")))))
        independent = nu("X", And(Box(Var("X")), mu("Y", Diamond(Var("Y")))))
        assert alternation_depth(nested) == 2
        assert alternation_depth(same) == 1
        assert alternation_depth(independent) == 1

    def test_04_fix_rank_parity(self):
        """μ 取奇数，ν 取偶数"""
        assert fix_rank("mu", 1) == 1
        assert fix_rank("mu", 2) == 3
        assert fix_rank("nu", 1) == 2
        assert fix_rank("nu", 2) == 2

    def test_05_global_support_bound(self):
        assert global_support_bound(parse_formula("true")) == 0
        assert global_support_bound(parse_formula("OR a . p(a)")) == 1
        assert global_support_bound(parse_formula("<> (OR a . p(a))")) == 1

    def test_06_vectorial_detection(self):
        assert has_vectorial(builtin_formula("chain-definer"))
        assert not has_vectorial(builtin_formula("psi"))

    def test_07_subformula_count(self):
        assert subformula_count(parse_formula("<> p(a)")) == 2


class TestNormalForms:
    """否定范式"""

    def test_01_negated_fixpoint_dualizes(self):
        assert nnf(Not(mu("X", Diamond(Var("X"))))) == nu("X", Box(Var("X")))

    def test_02_negation_pushed_to_predicates(self):
        f = nnf(Not(And(Pred("p"), Diamond(Pred("q")))))
        assert f == Or(Not(Pred("p")), Box(Not(Pred("q"))))
        assert is_nnf(f)

    def test_03_library_nnf(self):
        for name in ("psi", "P2", "chain-definer"):
            assert is_nnf(nnf(builtin_formula(name)))


class TestLibrary:
    """公式库"""

    def test_01_unknown_entry(self):
        with pytest.raises(NotFoundError):
            builtin_formula("nope")

    def test_02_ordered_only_entries(self):
        with pytest.raises(InputError):
            builtin_formula("infsucc-definer", AtomSort.EQUALITY)
        builtin_formula("infsucc-definer", AtomSort.ORDERED)
