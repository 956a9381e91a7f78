"""
自检：按 fixtures/matrix.yaml 运行验收矩阵，输出确定性的报告

报告不含耗时等随运行变化的字段；同一矩阵与种子两次运行的 JSON 输出逐字节相同。
"""
import itertools
import random
from pathlib import Path
from typing import Callable, Optional

import yaml

from app.atoms import AtomSort, SupportContext
from app.bisim import BisimKind, BisimMode, decide_bisimilar
from app.checker import brute_force_eval, eval as eval_formula, holds
from app.config import SELFTEST_MATRIX, SELFTEST_SEED, logger
from app.formulas import bekic_single_orbit, builtin_formula, global_support_bound, has_vectorial
from app.freshpath import bounded_oracle, decide_freshpath
from app.games import adequacy_check, check_winner_invariance, random_game
from app.kripke import KripkeModel, disjoint_union, load_model, parse_model, parse_state
from app.orbits import OrbitSet, least_support
from app.reductions import fixture_machine, ltl_eval_lasso, ltl_to_mu, run_to_lasso, tm_to_ltl
from app.utils import EngineError, InputError


def load_matrix(path: Optional[str] = None) -> dict:
    path = Path(path or SELFTEST_MATRIX)
    if not path.is_file():
        raise InputError(f"自检矩阵不存在：{path}")
    try:
        matrix = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise InputError(f"自检矩阵格式错误：{e}")
    if not isinstance(matrix, dict):
        raise InputError("自检矩阵顶层必须是映射")
    return matrix


def _model(spec: str) -> KripkeModel:
    return load_model(f"builtin:{spec}")


class _Criterion:
    """一项验收标准的计数与失败记录"""

    def __init__(self, name: str):
        self.name = name
        self.cases = 0
        self.skipped = 0
        self.failures: list[str] = []

    def record(self, label: str, ok: bool) -> None:
        self.cases += 1
        if not ok:
            self.failures.append(label)

    def attempt(self, label: str, fn: Callable[[], bool]) -> None:
        try:
            ok = fn()
        except EngineError as e:
            logger.warning(f"自检 {self.name} / {label} 出错：{e.message}")
            self.record(f"{label}: {e.message}", False)
            return
        self.record(label, ok)

    def report(self) -> dict:
        return {
            "name": self.name,
            "cases": self.cases,
            "skipped": self.skipped,
            "failures": self.failures,
            "passed": not self.failures,
        }


# ---------------------------------------------------------------------------
# 各项标准
# ---------------------------------------------------------------------------

def _canonical_count(sort: AtomSort, n: int) -> int:
    """蛮力枚举 {0..n-1}^n 的相等划分或全预序"""
    seen = set()
    for values in itertools.product(range(n), repeat=n):
        if sort is AtomSort.EQUALITY:
            first: dict = {}
            seen.add(tuple(first.setdefault(v, len(first)) for v in values))
        else:
            ranks = sorted(set(values))
            seen.add(tuple(ranks.index(v) for v in values))
    return len(seen)


def orbit_counts(section: dict, crit: _Criterion) -> None:
    for sort in AtomSort:
        ctx = SupportContext.empty(sort)
        for n in range(section.get("max_arity", 5) + 1):
            crit.record(f"{sort.value}^{n}", len(OrbitSet.full(ctx, "T", n)) == _canonical_count(sort, n))


def support(section: list, equivariant: list, crit: _Criterion) -> None:
    for case in section:
        crit.attempt(case["name"], lambda: list(least_support(parse_model(case["model"]).states)) == case["expect"])
    for spec in equivariant:
        crit.attempt(spec, lambda: least_support(_model(spec).states) == ())


def oracle(section: dict, crit: _Criterion) -> None:
    for spec in section["models"]:
        m = _model(spec)
        for name in section["formulas"]:
            f = builtin_formula(name, m.sort)
            crit.attempt(f"{spec} × {name}", lambda: eval_formula(m, f).orbits == brute_force_eval(m, f).orbits)


def truths(section: list, crit: _Criterion, include_slow: bool) -> None:
    for case in section:
        if case.get("slow") and not include_slow:
            crit.skipped += 1
            continue
        label = f"{case['model']} × {case['formula']}"

        def run() -> bool:
            m = _model(case["model"])
            f = builtin_formula(case["formula"], m.sort)
            if case.get("all_states"):
                return eval_formula(m, f).orbits == m.states.orbits
            return holds(m, parse_state(case["state"], m.sort), f) == case["expect"]

        crit.attempt(label if "state" not in case else f"{label} @ {case['state']}", run)


def adequacy(section: list, crit: _Criterion, include_slow: bool) -> None:
    for case in section:
        if case.get("slow") and not include_slow:
            crit.skipped += 1
            continue

        def run() -> bool:
            m = _model(case["model"])
            return adequacy_check(m, builtin_formula(case["formula"], m.sort))

        crit.attempt(f"{case['model']} × {case['formula']}", run)


def random_games(section: dict, crit: _Criterion, seed: int) -> None:
    rng = random.Random(seed)
    for i in range(section.get("count", 200)):
        g = random_game(rng, section.get("constants", 1), section.get("max_rank", 3))
        crit.attempt(f"game#{i}", lambda: check_winner_invariance(g))


def _bisim_pair(case: dict):
    if case.get("other"):
        union = disjoint_union(_model(case["model"]), _model(case["other"]))
        x, y = parse_state(case["x"], union.sort), parse_state(case["y"], union.sort)
        return union, x._replace(tag=f"L_{x.tag}"), y._replace(tag=f"R_{y.tag}")
    m = _model(case["model"])
    return m, parse_state(case["x"], m.sort), parse_state(case["y"], m.sort)


def bisim(section: list, formulas: list, crit: _Criterion, invariance: _Criterion, include_slow: bool) -> None:
    """互模拟判定；判定为互模拟的对再检查不变性"""
    for case in section:
        if case.get("slow") and not include_slow:
            crit.skipped += 1
            continue
        kind = BisimKind.parse(case["kind"], case["k"])
        label = f"{case['model']} {case['x']} ~ {case.get('other', case['model'])} {case['y']} [{kind}]"
        try:
            m, x, y = _bisim_pair(case)
            verdict = decide_bisimilar(m, x, y, kind)
        except EngineError as e:
            crit.record(f"{label}: {e.message}", False)
            continue
        crit.record(label, verdict == case["expect"])
        if not verdict:
            continue
        for name in formulas:
            try:
                f = builtin_formula(name, m.sort)
            except InputError:
                continue
            if global_support_bound(f) > kind.k or (kind.mode is BisimMode.STACK and has_vectorial(f)):
                continue
            invariance.attempt(f"{label} × {name}", lambda: holds(m, x, f) == holds(m, y, f))


def freshpath(section: dict, crit: _Criterion, oracle_crit: _Criterion) -> None:
    for case in section.get("cases", ()):
        n, k = case["n"], case["k"]
        for variant, expect in (("K", True), ("check", False)):
            spec = f"freshpath({n},{k},{variant})"
            crit.attempt(spec, lambda: decide_freshpath(_model(spec), parse_state("P_1()", AtomSort.ORDERED)) == expect)
    for case in section.get("oracle_models", ()):

        def implication() -> bool:
            m = _model(case["model"])
            x = parse_state(case["state"], m.sort)
            return not bounded_oracle(m, x).found or decide_freshpath(m, x)

        oracle_crit.attempt(f"{case['model']} @ {case['state']}", implication)


def reductions(section: dict, crit: _Criterion) -> None:
    steps = section.get("steps", 10)
    for name in section.get("machines", ()):

        def run() -> bool:
            tm = fixture_machine(name)
            run = run_to_lasso(tm, steps)
            ltl = tm_to_ltl(tm)
            translated = holds(run.model, run.start, ltl_to_mu(ltl))
            direct = ltl_eval_lasso(run.model, run.start, ltl)
            return translated and direct

        crit.attempt(name, run)


def bekic(section: list, crit: _Criterion, include_slow: bool) -> None:
    for case in section:
        if case.get("slow") and not include_slow:
            crit.skipped += 1
            continue

        def run() -> bool:
            m = _model(case["model"])
            f = builtin_formula(case["formula"], m.sort)
            return eval_formula(m, f).orbits == eval_formula(m, bekic_single_orbit(f)).orbits

        crit.attempt(f"{case['model']} × {case['formula']}", run)


# ---------------------------------------------------------------------------
# 入口
# ---------------------------------------------------------------------------

def run_selftest(seed: int = SELFTEST_SEED, matrix: Optional[dict] = None, include_slow: bool = False) -> dict:
    matrix = matrix if matrix is not None else load_matrix()
    names = ["orbit-counts", "support", "checker-vs-oracle", "fixture-truths", "adequacy", "quotient-games",
             "bisimulation", "invariance", "freshpath", "freshpath-oracle", "reductions", "bekic"]
    crits = {name: _Criterion(name) for name in names}
    formulas = matrix.get("oracle", {}).get("formulas", [])

    if "orbit_counts" in matrix:
        orbit_counts(matrix["orbit_counts"], crits["orbit-counts"])
    support(matrix.get("support", []), matrix.get("equivariant", []), crits["support"])
    if "oracle" in matrix:
        oracle(matrix["oracle"], crits["checker-vs-oracle"])
    truths(matrix.get("truths", []), crits["fixture-truths"], include_slow)
    adequacy(matrix.get("adequacy", []), crits["adequacy"], include_slow)
    if "random_games" in matrix:
        random_games(matrix["random_games"], crits["quotient-games"], seed)
    bisim(matrix.get("bisim", []), formulas, crits["bisimulation"], crits["invariance"], include_slow)
    if "freshpath" in matrix:
        freshpath(matrix["freshpath"], crits["freshpath"], crits["freshpath-oracle"])
    if "reductions" in matrix:
        reductions(matrix["reductions"], crits["reductions"])
    bekic(matrix.get("bekic", []), crits["bekic"], include_slow)

    criteria = [crits[name].report() for name in names]
    passed = all(c["passed"] for c in criteria)
    logger.info(f"自检完成（seed={seed}）：{'全部通过' if passed else '存在失败项'}")
    return {"seed": seed, "slow": include_slow, "criteria": criteria, "passed": passed}
