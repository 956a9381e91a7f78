"""
引擎操作层

命令行和 HTTP 接口共用的操作；每个操作返回可以直接序列化为 JSON 的字典，
列表按规范形式排序，相同输入得到逐字节相同的输出。
"""
from pathlib import Path
from typing import Optional

from app.bisim import BisimKind, decide_bisimilar
from app.checker import eval as eval_formula, holds
from app.config import logger
from app.formulas import FORMULA_SOURCES, builtin_formula, parse_formula, print_formula
from app.freshpath import bounded_oracle, cofinite_prefilter, decide_freshpath, khat_orbit_bound
from app.games import pairs_game, parse_game, winners
from app.kripke import BUILTIN_MODELS, KripkeModel, load_model, parse_model, parse_state, print_model
from app.reductions import (
    load_machine, ltl_to_mu, parse_tm, print_ltl, run_to_lasso,
    tm_clause_count, tm_to_ltl,
)
from app.utils import InputError, NotFoundError

BUILTIN_GAMES = {"pairs": pairs_game}
FIXTURE_MACHINES = ("accept-now", "write-one", "walk-right", "stuck")


# ---------------------------------------------------------------------------
# 输入解析
# ---------------------------------------------------------------------------

def _inline_only(ref: str, what: str, allow_files: bool) -> None:
    if not allow_files and not ref.startswith("builtin:"):
        raise InputError(f"{what} 只接受 builtin:名称 或内联文本")


def resolve_model(ref: Optional[str] = None, text: Optional[str] = None,
                  allow_files: bool = True) -> KripkeModel:
    """模型来源：内联文本优先，其次 builtin:名称(参数) 或文件路径"""
    if text:
        return parse_model(text, name="inline")
    if not ref:
        raise InputError("缺少模型")
    _inline_only(ref, "模型", allow_files)
    return load_model(ref)


def load_formula(ref: str, model: Optional[KripkeModel] = None, allow_files: bool = True):
    """
    公式来源：builtin:名称、以 .mu 结尾的文件路径，其余按公式文本解析
    """
    if ref.startswith("builtin:"):
        return builtin_formula(ref[len("builtin:"):], model.sort if model else None)
    if ref.endswith(".mu"):
        _inline_only(ref, "公式", allow_files)
        path = Path(ref)
        if not path.is_file():
            raise NotFoundError(f"公式文件不存在：{ref}")
        return parse_formula(path.read_text(encoding="utf-8"))
    return parse_formula(ref)


def resolve_game(ref: Optional[str] = None, text: Optional[str] = None, allow_files: bool = True):
    if text:
        return parse_game(text, name="inline")
    if not ref:
        raise InputError("缺少博弈")
    if ref.startswith("builtin:"):
        name = ref[len("builtin:"):]
        if name not in BUILTIN_GAMES:
            raise NotFoundError(f"未知内置博弈：{name}")
        return BUILTIN_GAMES[name]()
    _inline_only(ref, "博弈", allow_files)
    path = Path(ref)
    if not path.is_file():
        raise NotFoundError(f"博弈文件不存在：{ref}")
    return parse_game(path.read_text(encoding="utf-8"), name=path.stem)


def resolve_machine(ref: Optional[str] = None, text: Optional[str] = None, allow_files: bool = True):
    if text:
        return parse_tm(text, name="inline")
    if not ref:
        raise InputError("缺少图灵机")
    _inline_only(ref, "图灵机", allow_files)
    return load_machine(ref)


# ---------------------------------------------------------------------------
# 操作
# ---------------------------------------------------------------------------

def check(model: KripkeModel, formula, state: Optional[str] = None) -> dict:
    """⟦φ⟧ 的轨道列表；给出状态时另报告 holds(x, φ)"""
    value = eval_formula(model, formula)
    logger.info(f"模型 {model.name} 上公式成立于 {len(value)} 个状态轨道")
    result = {
        "model": model.name,
        "formula": print_formula(formula),
        "satisfied": value.dump(),
        "orbits": len(value),
    }
    if state is not None:
        x = parse_state(state, model.sort)
        result["state"] = str(x)
        result["holds"] = model.element(x) in value
    return result


def solve_game(game) -> dict:
    exists, forall = winners(game)
    return {
        "game": game.name,
        "nodes": len(game.nodes),
        "exists": exists.dump(),
        "forall": forall.dump(),
    }


def bisim(model: KripkeModel, x: str, y: str, kind: BisimKind) -> dict:
    ex, ey = parse_state(x, model.sort), parse_state(y, model.sort)
    return {
        "model": model.name,
        "kind": str(kind),
        "x": str(ex),
        "y": str(ey),
        "bisimilar": decide_bisimilar(model, ex, ey, kind),
    }


def freshpath(model: KripkeModel, state: str, oracle: bool = False) -> dict:
    x = parse_state(state, model.sort)
    result = {
        "model": model.name,
        "state": str(x),
        "prefilter": cofinite_prefilter(model, x).value,
        "khat_bound": khat_orbit_bound(model),
        "holds": decide_freshpath(model, x),
    }
    if oracle:
        found = bounded_oracle(model, x)
        result["oracle"] = found.verdict.value
        result["witness"] = [str(e) for e in found.path]
    return result


def translate_ltl(tm, with_infinite_path: bool = False) -> dict:
    ltl = tm_to_ltl(tm)
    return {
        "machine": tm.name,
        "clauses": tm_clause_count(tm),
        "ltl": print_ltl(ltl),
        "mu": print_formula(ltl_to_mu(ltl, with_infinite_path)),
    }


def gen_run_model(tm, steps: int = 16, verify: bool = False) -> dict:
    run = run_to_lasso(tm, steps)
    result = {
        "machine": tm.name,
        "steps": len(run.configurations) - 1,
        "start": str(run.start),
        "model": print_model(run.model),
    }
    if verify:
        result["holds"] = holds(run.model, run.start, ltl_to_mu(tm_to_ltl(tm)))
    return result


def orbits(model: KripkeModel) -> dict:
    ctx = model.ctx
    return {
        "model": model.name,
        "atoms": ctx.sort.value,
        "constants": list(ctx.names),
        "states": model.states.dump(),
        "trans": model.trans.dump(),
        "sat": model.sat.dump(),
    }


def builtins() -> dict:
    return {
        "models": sorted(BUILTIN_MODELS),
        "formulas": sorted(FORMULA_SOURCES),
        "games": sorted(BUILTIN_GAMES),
        "machines": list(FIXTURE_MACHINES),
    }

