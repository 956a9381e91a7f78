"""
不可判定性归约的可执行产物

- 图灵机 -> 原子 LTL 公式（接受空串当且仅当公式可满足）
- LTL（否定范式）-> μ-演算的 M 翻译
- 接受运行 -> 确定性套索模型，用来正向检验编码
- 套索模型上的直接 LTL 求值，作为 M 翻译的对照
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

from app.atoms import Literal, TRUE, evaluate_constraint, format_constraint, type_of
from app.config import FIXTURES_DIR, logger
from app.dsl import parse_machine_text
from app.formulas import (
    And, Box, Const, Diamond, FF, Not, Or, OrbitAnd, OrbitOr, Pred, TT, Var,
    mu, nu, rename_apart, validate,
)
from app.kripke import KripkeModel, parse_model
from app.orbits import Element, PairOrbit
from app.utils import InputError, NotFoundError, UnsupportedModelError


# ---------------------------------------------------------------------------
# 图灵机
# ---------------------------------------------------------------------------

class Rule(NamedTuple):
    state: str
    read: str
    target: str
    write: str
    move: str


@dataclass(frozen=True)
class TuringMachine:
    """确定性图灵机；字母表第一个符号是空白符，接受状态没有出边"""
    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    init: str
    accept: str
    rules: tuple[Rule, ...] = ()
    name: str = "tm"

    def __post_init__(self):
        if not self.states or not self.alphabet:
            raise InputError("图灵机需要非空的状态集与字母表")
        if len(set(self.states)) != len(self.states) or len(set(self.alphabet)) != len(self.alphabet):
            raise InputError("状态或字母表有重复")
        for q in (self.init, self.accept):
            if q not in self.states:
                raise InputError(f"未声明的状态：{q}")
        seen = set()
        for rule in self.rules:
            if rule.state not in self.states or rule.target not in self.states:
                raise InputError(f"规则使用了未声明的状态：{rule}")
            if rule.read not in self.alphabet or rule.write not in self.alphabet:
                raise InputError(f"规则使用了未声明的符号：{rule}")
            if rule.move not in ("L", "R"):
                raise InputError(f"移动方向只能是 L 或 R：{rule.move}")
            if rule.state == self.accept:
                raise InputError("接受状态不能有出边")
            key = (rule.state, rule.read)
            if key in seen:
                raise InputError(f"图灵机不是确定性的：({rule.state}, {rule.read}) 有多条规则")
            seen.add(key)

    @property
    def blank(self) -> str:
        return self.alphabet[0]

    def rule_for(self, state: str, symbol: str) -> Optional[Rule]:
        return next((r for r in self.rules if r.state == state and r.read == symbol), None)


def parse_tm(text: str, name: str = "tm") -> TuringMachine:
    source = parse_machine_text(text)
    if source.init is None or source.accept is None:
        raise InputError("图灵机缺少 init 或 accept 声明")
    return TuringMachine(tuple(source.states), tuple(source.alphabet), source.init, source.accept,
                         tuple(Rule(*r) for r in source.rules), name=name)


def fixture_machine(name: str) -> TuringMachine:
    path = FIXTURES_DIR / "machines" / f"{name}.tm"
    if not path.is_file():
        raise NotFoundError(f"未知图灵机：{name}")
    return parse_tm(path.read_text(encoding="utf-8"), name=name)


def load_machine(ref: str) -> TuringMachine:
    """ "builtin:name" 或图灵机文件路径 """
    if ref.startswith("builtin:"):
        return fixture_machine(ref[len("builtin:"):])
    path = Path(ref)
    if not path.is_file():
        raise NotFoundError(f"图灵机文件不存在：{ref}")
    return parse_tm(path.read_text(encoding="utf-8"), name=path.stem)


# ---------------------------------------------------------------------------
# LTL
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Next:
    body: object


@dataclass(frozen=True)
class Until:
    left: object
    right: object


@dataclass(frozen=True)
class Release:
    left: object
    right: object


def eventually(f) -> Until:
    return Until(TT, f)


def always(f) -> Release:
    return Release(FF, f)


def implies(a, b):
    return Or(Not(a), b)


def big_and(parts: Sequence):
    parts = list(parts)
    if not parts:
        return TT
    result = parts[0]
    for part in parts[1:]:
        result = And(result, part)
    return result


def big_or(parts: Sequence):
    parts = list(parts)
    if not parts:
        return FF
    result = parts[0]
    for part in parts[1:]:
        result = Or(result, part)
    return result


def ltl_nnf(f):
    """把否定下推到基本谓词"""

    def go(node, neg: bool):
        if isinstance(node, Const):
            return Const(node.value != neg)
        if isinstance(node, Pred):
            return Not(node) if neg else node
        if isinstance(node, Not):
            return go(node.body, not neg)
        if isinstance(node, (Or, And)):
            kind = type(node) if not neg else (And if isinstance(node, Or) else Or)
            return kind(go(node.left, neg), go(node.right, neg))
        if isinstance(node, (OrbitOr, OrbitAnd)):
            kind = type(node) if not neg else (OrbitAnd if isinstance(node, OrbitOr) else OrbitOr)
            return kind(node.vars, node.where, go(node.body, neg))
        if isinstance(node, Next):
            return Next(go(node.body, neg))
        if isinstance(node, (Until, Release)):
            kind = type(node) if not neg else (Release if isinstance(node, Until) else Until)
            return kind(go(node.left, neg), go(node.right, neg))
        raise InputError(f"不是 LTL 公式节点：{node!r}")

    return go(f, False)


def is_ltl_nnf(f) -> bool:
    if isinstance(f, Not):
        return isinstance(f.body, Pred)
    if isinstance(f, (Const, Pred)):
        return True
    if isinstance(f, Next):
        return is_ltl_nnf(f.body)
    if isinstance(f, (Or, And, Until, Release)):
        return is_ltl_nnf(f.left) and is_ltl_nnf(f.right)
    if isinstance(f, (OrbitOr, OrbitAnd)):
        return is_ltl_nnf(f.body)
    return False


def print_ltl(f) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Pred):
        return f"{f.tag}({', '.join(f.args)})"
    if isinstance(f, Not):
        return f"~{print_ltl(f.body)}"
    if isinstance(f, Or):
        return f"({print_ltl(f.left)} \\/ {print_ltl(f.right)})"
    if isinstance(f, And):
        return f"({print_ltl(f.left)} /\\ {print_ltl(f.right)})"
    if isinstance(f, (OrbitOr, OrbitAnd)):
        word = "OR" if isinstance(f, OrbitOr) else "AND"
        where = "" if f.where == TRUE else f" where {format_constraint(f.where)}"
        return f"({word} {', '.join(f.vars)}{where} . {print_ltl(f.body)})"
    if isinstance(f, Next):
        return f"X {print_ltl(f.body)}"
    if isinstance(f, Until):
        return f"({print_ltl(f.left)} U {print_ltl(f.right)})"
    if isinstance(f, Release):
        return f"({print_ltl(f.left)} R {print_ltl(f.right)})"
    raise InputError(f"不是 LTL 公式节点：{f!r}")


# ---------------------------------------------------------------------------
# 图灵机 -> LTL
# ---------------------------------------------------------------------------

DOLLAR = Pred("dollar")


def atom(a: str) -> Pred:
    return Pred("atom", (a,))


def tape(symbol: str) -> Pred:
    return Pred(f"tape_{symbol}")


def head(state: str) -> Pred:
    return Pred(f"head_{state}")


def _pairwise_exclusive(preds: Sequence[Pred]):
    return big_and(Or(Not(p), Not(q)) for p, q in itertools.combinations(preds, 2))


def _follows(first, second):
    """first 后面紧跟 second 一次，则处处如此"""
    return always(implies(And(first, Next(second)), always(implies(first, Next(second)))))


def tm_clauses(tm: TuringMachine) -> list:
    """编码的各个合取项（未做否定范式化）"""
    heads = [head(q) for q in tm.states]
    tapes = [tape(g) for g in tm.alphabet]
    psi = big_or(heads)
    not_psi = big_and(Not(h) for h in heads)
    distinct = Literal("!=", "a", "b")

    clauses = [
        always(Or(DOLLAR, OrbitOr(("a",), TRUE, atom("a")))),
        OrbitAnd(("a", "b"), distinct, always(implies(atom("a"), Not(atom("b"))))),
        always(implies(DOLLAR, And(OrbitAnd(("a",), TRUE, Not(atom("a"))),
                                   big_and(Not(p) for p in tapes + heads)))),
        always(Or(DOLLAR, big_or(tapes))),
        always(_pairwise_exclusive(tapes)),
        always(_pairwise_exclusive(heads)),
        DOLLAR,
        OrbitAnd(("a", "b"), TRUE, _follows(atom("a"), atom("b"))),
        OrbitAnd(("a",), TRUE, _follows(atom("a"), DOLLAR)),
        OrbitAnd(("b",), TRUE, _follows(DOLLAR, atom("b"))),
        OrbitAnd(("a",), TRUE, always(implies(atom("a"), Next(Until(Not(atom("a")), DOLLAR))))),
        always(implies(DOLLAR, Next(Until(And(not_psi, Not(DOLLAR)),
                                          And(psi, Next(Until(not_psi, DOLLAR))))))),
    ]
    for g in tm.alphabet:
        clauses.append(OrbitAnd(("a",), TRUE, always(implies(
            And(And(atom("a"), tape(g)), not_psi),
            Next(Until(Not(atom("a")), And(atom("a"), tape(g))))))))
    for rule in tm.rules:
        here = And(And(atom("a"), head(rule.state)), tape(rule.read))
        if rule.move == "R":
            then = And(And(atom("a"), tape(rule.write)), Next(head(rule.target)))
        else:
            then = And(head(rule.target), Next(And(atom("a"), tape(rule.write))))
        clauses.append(OrbitAnd(("a",), TRUE, always(implies(here, Next(Until(Not(atom("a")), then))))))
    clauses += [
        Next(head(tm.init)),
        Next(Until(tape(tm.blank), DOLLAR)),
        eventually(head(tm.accept)),
    ]
    return clauses


def tm_clause_count(tm: TuringMachine) -> int:
    """固定 15 条 + 每个符号一条帧条件 + 每条规则一条"""
    return len(tm_clauses(tm))


def tm_to_ltl(tm: TuringMachine):
    formula = ltl_nnf(big_and(tm_clauses(tm)))
    logger.debug(f"图灵机 {tm.name} 编码为 {tm_clause_count(tm)} 个合取项")
    return formula


# ---------------------------------------------------------------------------
# M 翻译
# ---------------------------------------------------------------------------

def ltl_to_mu(f, with_infinite_path: bool = False):
    """
    M(Xφ) = □M(φ)，M(φ U ψ) = μY.(M(ψ) ∨ (M(φ) ∧ □Y))，M(φ R ψ) = νY.(M(ψ) ∧ (M(φ) ∨ □Y))
    """
    if not is_ltl_nnf(f):
        raise InputError("M 翻译要求 LTL 公式处于否定范式")
    counter = itertools.count(1)

    def go(node):
        if isinstance(node, (Const, Pred)):
            return node
        if isinstance(node, Not):
            return Not(go(node.body))
        if isinstance(node, (Or, And)):
            return type(node)(go(node.left), go(node.right))
        if isinstance(node, (OrbitOr, OrbitAnd)):
            return type(node)(node.vars, node.where, go(node.body))
        if isinstance(node, Next):
            return Box(go(node.body))
        name = f"Y{next(counter)}"
        left, right = go(node.left), go(node.right)
        if isinstance(node, Until):
            return mu(name, Or(right, And(left, Box(Var(name)))))
        return nu(name, And(right, Or(left, Box(Var(name)))))

    result = go(f)
    if with_infinite_path:
        result = And(result, nu("Inf", Diamond(Var("Inf"))))
    result = rename_apart(result)
    validate(result)
    return result


# ---------------------------------------------------------------------------
# 运行 -> 套索模型
# ---------------------------------------------------------------------------

class Configuration(NamedTuple):
    state: str
    head: int
    tape: tuple[str, ...]


class LassoRun(NamedTuple):
    model: KripkeModel
    start: Element
    configurations: tuple[Configuration, ...]


def simulate(tm: TuringMachine, max_steps: int = 16) -> list[Configuration]:
    """从空带开始运行到接受；不接受时报 InputError"""
    state, position, cells = tm.init, 0, {}
    configs = []
    for _ in range(max_steps + 1):
        configs.append(Configuration(state, position, tuple(cells.get(i, tm.blank)
                                                             for i in range(max(cells, default=0) + 1))))
        if state == tm.accept:
            return configs
        rule = tm.rule_for(state, cells.get(position, tm.blank))
        if rule is None:
            raise InputError(f"图灵机在非接受状态 {state} 停机")
        cells[position] = rule.write
        state = rule.target
        position += 1 if rule.move == "R" else -1
        if position < 0:
            raise InputError("读写头移出了纸带左端")
    raise InputError(f"图灵机在 {max_steps} 步内没有接受")


def configurations_to_lasso(tm: TuringMachine, configs: Sequence[Configuration]) -> LassoRun:
    """
    把格局序列编码为 $w$w$w… 形式的确定性套索：每个格局占 L 个格子，
    格子 j 标注 atom(a_j)，最后一个格局循环回自身
    """
    if not configs:
        raise InputError("格局序列为空")
    width = max(max(c.head for c in configs), max(len(c.tape) for c in configs) - 1) + 1
    names = [f"a{j + 1}" for j in range(width)]
    lines = ["atoms equality", "const " + ", ".join(f"{n} = {j + 1}" for j, n in enumerate(names))]
    last = len(configs) - 1
    for i, config in enumerate(configs):
        lines += [f"state D_{i}()", f"label D_{i}() : dollar()"]
        previous = f"D_{i}"
        for j in range(width):
            cell = f"C_{i}_{j + 1}"
            symbol = config.tape[j] if j < len(config.tape) else tm.blank
            lines += [f"state {cell}()", f"label {cell}() : atom({names[j]})", f"label {cell}() : tape_{symbol}()"]
            if j == config.head:
                lines.append(f"label {cell}() : head_{config.state}()")
            lines.append(f"trans {previous}() -> {cell}()")
            previous = cell
        following = f"D_{i + 1}" if i < last else f"D_{i}"
        lines.append(f"trans {previous}() -> {following}()")
    model = parse_model("\n".join(lines) + "\n", name=f"run({tm.name})")
    return LassoRun(model, Element("D_0"), tuple(configs))


def run_to_lasso(tm: TuringMachine, max_steps: int = 16) -> LassoRun:
    configs = simulate(tm, max_steps)
    logger.debug(f"图灵机 {tm.name} 在 {len(configs) - 1} 步后接受")
    return configurations_to_lasso(tm, configs)


def ctl_tm_source(machine: str = "write-one") -> str:
    """(𝔸 × Γ × (Q ∪ {nohead})) ∪ {$}，任意两个状态之间双向转移"""
    tm = fixture_machine(machine)
    tags = ["Dollar"] + [f"Cell_{g}_{q}" for g in tm.alphabet for q in list(tm.states) + ["nohead"]]
    lines = ["atoms equality", "state Dollar()", "label Dollar() : dollar()"]
    for g in tm.alphabet:
        for q in list(tm.states) + ["nohead"]:
            tag = f"Cell_{g}_{q}"
            lines += [f"state {tag}(a)", f"label {tag}(a) : atom(a)", f"label {tag}(a) : tape_{g}()"]
            if q != "nohead":
                lines.append(f"label {tag}(a) : head_{q}()")

    def term(tag: str, var: str) -> str:
        return f"{tag}()" if tag == "Dollar" else f"{tag}({var})"

    for left in tags:
        for right in tags:
            lines.append(f"trans {term(left, 'a')} -> {term(right, 'b')}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# 套索上的直接 LTL 求值
# ---------------------------------------------------------------------------

def _scope_width(f) -> int:
    """同时处于作用域内的绑定变量个数的最大值"""
    if isinstance(f, (OrbitOr, OrbitAnd)):
        return len(f.vars) + _scope_width(f.body)
    if isinstance(f, (Not, Next)):
        return _scope_width(f.body)
    if isinstance(f, (Or, And, Until, Release)):
        return max(_scope_width(f.left), _scope_width(f.right))
    return 0


def ltl_eval_lasso(model: KripkeModel, start: Element, f) -> bool:
    """确定性无参状态模型上沿唯一路径求 LTL 公式的真值"""
    if model.max_state_arity > 0:
        raise UnsupportedModelError("套索求值只支持无参状态")
    nodes = [o.tag for o in model.states]
    succ: dict[str, list[str]] = {tag: [] for tag in nodes}
    for p in model.trans:
        succ[p.left].append(p.right)
    if any(len(targets) != 1 for targets in succ.values()):
        raise UnsupportedModelError("模型不是确定性的（每个状态恰有一个后继）")
    model.element(start)
    ctx = model.ctx
    start_value = max(ctx.witnesses, default=0) + 1
    pool = list(ctx.witnesses) + list(range(start_value, start_value + _scope_width(f)))
    constants = dict(zip(ctx.names, ctx.witnesses))
    nxt = {tag: succ[tag][0] for tag in nodes}
    everything = frozenset(nodes)

    def labelled(pred: Pred, values: dict) -> frozenset:
        args = tuple(values[a] if a in values else constants[a] for a in pred.args)
        t = type_of(args, ctx)
        return frozenset(tag for tag in nodes if PairOrbit(tag, 0, pred.tag, len(args), t) in model.sat_index)

    def pre(target: frozenset) -> frozenset:
        return frozenset(tag for tag in nodes if nxt[tag] in target)

    def sem(node, values: dict) -> frozenset:
        if isinstance(node, Const):
            return everything if node.value else frozenset()
        if isinstance(node, Pred):
            return labelled(node, values)
        if isinstance(node, Not):
            return everything - sem(node.body, values)
        if isinstance(node, Or):
            return sem(node.left, values) | sem(node.right, values)
        if isinstance(node, And):
            return sem(node.left, values) & sem(node.right, values)
        if isinstance(node, (OrbitOr, OrbitAnd)):
            disjunctive = isinstance(node, OrbitOr)
            result = frozenset() if disjunctive else everything
            for choice in itertools.product(pool, repeat=len(node.vars)):
                inner = {**values, **dict(zip(node.vars, choice))}
                if not evaluate_constraint(node.where, {**constants, **inner}, ctx.sort):
                    continue
                body = sem(node.body, inner)
                result = result | body if disjunctive else result & body
            return result
        if isinstance(node, Next):
            return pre(sem(node.body, values))
        if isinstance(node, Until):
            left, right = sem(node.left, values), sem(node.right, values)
            current: frozenset = frozenset()
            while True:
                step = right | (left & pre(current))
                if step == current:
                    return current
                current = step
        if isinstance(node, Release):
            left, right = sem(node.left, values), sem(node.right, values)
            current = everything
            while True:
                step = right & (left | pre(current))
                if step == current:
                    return current
                current = step
        raise InputError(f"不是 LTL 公式节点：{node!r}")

    return start.tag in sem(f, {})
