"""
OrbitMu 命令行

    python -m app.cli check builtin:star builtin:psi --state "Star()"
    python -m app.cli bisim builtin:"infsucc(1)" "P()" "Q()" --kind full --k 1
    python -m app.cli selftest --seed 0 --format json

退出码：0 计算完成（无论答案真假），2 输入错误，3 内部不变量被破坏。
"""
import argparse
import json
import sys
from typing import Optional

from pydantic import ValidationError as ConfigError

from app import engine_service as service
from app.bisim import BisimKind
from app.config import SELFTEST_SEED, logger
from app.models import RunConfig
from app.selftest import load_matrix, run_selftest
from app.utils import EXIT_INPUT_ERROR, EXIT_INVARIANT, EXIT_OK, EngineError
from app.version import __version__


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orbitmu", description="轨道有限集合上的原子 μ-演算工具")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json"], default="text", help="输出格式")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="求 ⟦φ⟧ 或 holds(x, φ)")
    p.add_argument("model", help="builtin:名称(参数) 或模型文件")
    p.add_argument("formula", help="builtin:名称、.mu 文件或公式文本")
    p.add_argument("--state", help="具体状态，如 \"Leaf(3)\"")

    p = sub.add_parser("solve-game", parents=[common], help="求原子奇偶博弈的胜区")
    p.add_argument("game", help="builtin:pairs 或博弈文件")

    p = sub.add_parser("bisim", parents=[common], help="判定 k-(栈)互模拟")
    p.add_argument("model")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--kind", choices=["stack", "full"], default="full")
    p.add_argument("--k", type=int, default=1)

    p = sub.add_parser("freshpath", parents=[common], help="判定 #Path")
    p.add_argument("model")
    p.add_argument("state")
    p.add_argument("--oracle", action="store_true", help="同时运行有界搜索")

    p = sub.add_parser("translate-ltl", parents=[common], help="图灵机 -> LTL -> μ-演算")
    p.add_argument("machine", help="builtin:名称 或 .tm 文件")
    p.add_argument("--infinite-path", action="store_true", help="合取 νX.◇X")

    p = sub.add_parser("gen-run-model", parents=[common], help="接受运行 -> 确定性套索模型")
    p.add_argument("machine")
    p.add_argument("--steps", type=int, default=16)
    p.add_argument("--verify", action="store_true", help="在套索上检查翻译后的公式")

    p = sub.add_parser("orbits", parents=[common], help="列出模型的轨道")
    p.add_argument("model")

    p = sub.add_parser("selftest", parents=[common], help="运行验收矩阵")
    p.add_argument("--seed", type=int, default=SELFTEST_SEED)
    p.add_argument("--matrix", help="自检矩阵 YAML 路径")
    p.add_argument("--all", dest="include_slow", action="store_true", help="包括 slow 条目")
    return parser


def to_config(args: argparse.Namespace) -> RunConfig:
    states = [s for s in (getattr(args, "state", None), getattr(args, "x", None), getattr(args, "y", None)) if s]
    return RunConfig(
        command=args.command,
        model=getattr(args, "model", None),
        formula=getattr(args, "formula", None),
        game=getattr(args, "game", None),
        machine=getattr(args, "machine", None),
        states=states,
        format=args.format,
        seed=getattr(args, "seed", SELFTEST_SEED),
        k=getattr(args, "k", 1),
        kind=getattr(args, "kind", "full"),
        steps=getattr(args, "steps", 16),
        infinitePath=getattr(args, "infinite_path", False),
        oracle=getattr(args, "oracle", False),
        verify=getattr(args, "verify", False),
        matrix=getattr(args, "matrix", None),
        includeSlow=getattr(args, "include_slow", False),
    )


def cmd_check(config: RunConfig) -> dict:
    model = service.resolve_model(config.model)
    formula = service.load_formula(config.formula, model)
    return service.check(model, formula, config.states[0] if config.states else None)


def cmd_solve_game(config: RunConfig) -> dict:
    return service.solve_game(service.resolve_game(config.game))


def cmd_bisim(config: RunConfig) -> dict:
    model = service.resolve_model(config.model)
    x, y = config.states
    return service.bisim(model, x, y, BisimKind.parse(config.kind, config.k))


def cmd_freshpath(config: RunConfig) -> dict:
    return service.freshpath(service.resolve_model(config.model), config.states[0], config.oracle)


def cmd_translate_ltl(config: RunConfig) -> dict:
    return service.translate_ltl(service.resolve_machine(config.machine), config.infinitePath)


def cmd_gen_run_model(config: RunConfig) -> dict:
    return service.gen_run_model(service.resolve_machine(config.machine), config.steps, config.verify)


def cmd_orbits(config: RunConfig) -> dict:
    return service.orbits(service.resolve_model(config.model))


def cmd_selftest(config: RunConfig) -> dict:
    return run_selftest(config.seed, load_matrix(config.matrix), config.includeSlow)


COMMANDS = {
    "check": cmd_check,
    "solve-game": cmd_solve_game,
    "bisim": cmd_bisim,
    "freshpath": cmd_freshpath,
    "translate-ltl": cmd_translate_ltl,
    "gen-run-model": cmd_gen_run_model,
    "orbits": cmd_orbits,
    "selftest": cmd_selftest,
}


def execute(config: RunConfig) -> dict:
    return COMMANDS[config.command](config)


# ---------------------------------------------------------------------------
# 输出
# ---------------------------------------------------------------------------

def render_json(result: dict) -> str:
    return json.dumps(result, sort_keys=True, ensure_ascii=False, indent=2)


def _render_selftest(result: dict) -> str:
    lines = [f"seed: {result['seed']}"]
    for c in result["criteria"]:
        status = "PASS" if c["passed"] else "FAIL"
        extra = f", 跳过 {c['skipped']}" if c["skipped"] else ""
        lines.append(f"{status} {c['name']} ({c['cases']} 项{extra})")
        lines.extend(f"    ✗ {failure}" for failure in c["failures"])
    lines.append("passed: " + ("true" if result["passed"] else "false"))
    return "\n".join(lines)


def render_text(result: dict) -> str:
    if "criteria" in result:
        return _render_selftest(result)
    lines = []
    for key, value in result.items():
        if isinstance(value, list):
            lines.append(f"{key}:")
            lines.extend(f"  {item}" for item in value)
        elif isinstance(value, bool):
            lines.append(f"{key}: {'true' if value else 'false'}")
        elif isinstance(value, str) and "\n" in value:
            lines.append(f"{key}:")
            lines.extend(f"  {line}" for line in value.rstrip("\n").split("\n"))
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = to_config(args)
    except ConfigError as e:
        print(f"参数错误：{e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        result = execute(config)
    except EngineError as e:
        print(f"错误：{e.message}", file=sys.stderr)
        if e.detail:
            print(e.detail, file=sys.stderr)
        return e.exit_code
    except RecursionError:
        logger.error("递归过深")
        return EXIT_INVARIANT
    print(render_json(result) if config.format == "json" else render_text(result))
    if config.command == "selftest" and not result["passed"]:
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
