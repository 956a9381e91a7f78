import pytest

from app.selftest import load_matrix, run_selftest
from app.utils import InputError


def criterion(report: dict, name: str) -> dict:
    return next(c for c in report["criteria"] if c["name"] == name)


class TestMatrix:
    """自检矩阵的读取"""

    def test_01_default_matrix_sections(self):
        matrix = load_matrix()
        for section in ("orbit_counts", "support", "oracle", "truths", "random_games", "bisim",
                        "freshpath", "reductions", "bekic"):
            assert section in matrix

    def test_02_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            load_matrix(str(tmp_path / "missing.yaml"))

    def test_03_top_level_must_be_mapping(self, tmp_path):
        path = tmp_path / "matrix.yaml"
        path.write_text("- a\n- b\n", encoding="utf-8")
        with pytest.raises(InputError):
            load_matrix(str(path))

    def test_04_malformed_yaml(self, tmp_path):
        path = tmp_path / "matrix.yaml"
        path.write_text("a: [1, 2\n", encoding="utf-8")
        with pytest.raises(InputError):
            load_matrix(str(path))


class TestRun:
    """按标准汇总的报告"""

    def test_01_orbit_counts(self):
        report = run_selftest(matrix={"orbit_counts": {"max_arity": 3}})
        c = criterion(report, "orbit-counts")
        assert c["cases"] == 2 * 4
        assert c["passed"]
        assert report["passed"]

    def test_02_failing_case_is_reported(self):
        matrix = {"support": [{"name": "wrong", "model": "atoms equality\nstate A()\n", "expect": ["x"]}]}
        report = run_selftest(matrix=matrix)
        c = criterion(report, "support")
        assert c["failures"] == ["wrong"]
        assert not report["passed"]

    def test_03_engine_errors_become_failures(self):
        report = run_selftest(matrix={"equivariant": ["nope"]})
        c = criterion(report, "support")
        assert len(c["failures"]) == 1
        assert c["failures"][0].startswith("nope: ")

    def test_04_slow_entries_skipped(self):
        matrix = {"bekic": [{"model": "fan(2)", "formula": "evensucc-definer", "slow": True}]}
        c = criterion(run_selftest(matrix=matrix), "bekic")
        assert c["skipped"] == 1
        assert c["cases"] == 0

    def test_05_reductions(self):
        report = run_selftest(matrix={"reductions": {"machines": ["accept-now", "write-one"], "steps": 10}})
        c = criterion(report, "reductions")
        assert c["cases"] == 2
        assert c["passed"]

    def test_06_report_is_deterministic(self):
        matrix = {"random_games": {"count": 5, "constants": 1, "max_rank": 3}}
        assert run_selftest(seed=3, matrix=matrix) == run_selftest(seed=3, matrix=matrix)

    @pytest.mark.slow
    def test_07_full_matrix(self):
        assert run_selftest(include_slow=True)["passed"]
