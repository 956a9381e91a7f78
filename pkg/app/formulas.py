"""
原子 μ-演算公式

标量与向量（原子索引方程组）两种形式共用一棵 AST：
标量不动点就是只有一个无参数方程的方程组。
提供解析/打印、否定范式、交替深度、全局支撑界、Bekić 单轨道化与公式库。
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

from app.atoms import (
    AtomSort, Constraint, Literal, SupportContext, TRUE, FALSE,
    complete, conj, constraint_names, format_constraint, rename_constraint, type_constraint,
)
from app.utils import InputError, NotFoundError, ValidationError


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Pred:
    tag: str
    args: tuple = ()


@dataclass(frozen=True)
class Var:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class OrbitOr:
    vars: tuple
    where: object
    body: object


@dataclass(frozen=True)
class OrbitAnd:
    vars: tuple
    where: object
    body: object


@dataclass(frozen=True)
class Diamond:
    body: object


@dataclass(frozen=True)
class Box:
    body: object


@dataclass(frozen=True)
class Equation:
    name: str
    params: tuple
    guard: object
    body: object


@dataclass(frozen=True)
class Fix:
    kind: str
    equations: tuple
    entry: str
    entry_args: tuple = ()

    @property
    def is_scalar(self) -> bool:
        return len(self.equations) == 1 and not self.equations[0].params

    def equation(self, name: str) -> Equation:
        for eq in self.equations:
            if eq.name == name:
                return eq
        raise ValidationError(f"方程组中没有变量 {name}")


Formula = object
TT = Const(True)
FF = Const(False)
DUAL = {"mu": "nu", "nu": "mu"}


def mu(name: str, body) -> Fix:
    return Fix("mu", (Equation(name, (), TRUE, body),), name)


def nu(name: str, body) -> Fix:
    return Fix("nu", (Equation(name, (), TRUE, body),), name)


def children(f) -> list[tuple[str, object]]:
    """子公式及其地址后缀"""
    if isinstance(f, (Not, Diamond, Box, OrbitOr, OrbitAnd)):
        return [("0", f.body)]
    if isinstance(f, (Or, And)):
        return [("0", f.left), ("1", f.right)]
    if isinstance(f, Fix):
        return [(str(i), eq.body) for i, eq in enumerate(f.equations)]
    return []


def subformula_count(f) -> int:
    return 1 + sum(subformula_count(c) for _, c in children(f))


def _map_children(f, fn: Callable):
    if isinstance(f, (Not, Diamond, Box)):
        return type(f)(fn(f.body))
    if isinstance(f, (Or, And)):
        return type(f)(fn(f.left), fn(f.right))
    if isinstance(f, (OrbitOr, OrbitAnd)):
        return type(f)(f.vars, f.where, fn(f.body))
    if isinstance(f, Fix):
        return replace(f, equations=tuple(replace(eq, body=fn(eq.body)) for eq in f.equations))
    return f


# ---------------------------------------------------------------------------
# 静态分析
# ---------------------------------------------------------------------------

@dataclass
class Analysis:
    """按地址记录的静态信息；根地址为 "r"，子公式地址为 父地址.序号"""
    nodes: dict = field(default_factory=dict)
    fv: dict = field(default_factory=dict)          # 自由原子变量（排序元组）
    consts: dict = field(default_factory=dict)      # 子树中作为常量使用的名字
    freefix: dict = field(default_factory=dict)     # 自由不动点变量
    fix_p: dict = field(default_factory=dict)       # 方程组的外部原子参数 P
    binding: dict = field(default_factory=dict)     # 变量出现地址 -> (方程组地址, 方程下标)
    constants: set = field(default_factory=set)

    def is_var(self, addr: str, name: str) -> bool:
        return name in self.fv[addr]


def analyze(f) -> Analysis:
    info = Analysis()

    def term_vars(terms, scope) -> set:
        return {t for t in terms if t in scope}

    def term_consts(terms, scope) -> set:
        return {t for t in terms if t not in scope}

    def walk(node, addr: str, scope: frozenset, fixenv: dict) -> tuple[set, set, set]:
        info.nodes[addr] = node
        if isinstance(node, Const):
            fv, consts, ffix = set(), set(), set()
        elif isinstance(node, Pred):
            fv, consts, ffix = term_vars(node.args, scope), term_consts(node.args, scope), set()
        elif isinstance(node, Var):
            fv = term_vars(node.args, scope)
            consts = term_consts(node.args, scope)
            if node.name in fixenv:
                fix_addr, index, p = fixenv[node.name]
                info.binding[addr] = (fix_addr, index)
                fv |= set(p)
            ffix = {node.name}
        elif isinstance(node, (Not, Diamond, Box)):
            fv, consts, ffix = walk(node.body, addr + ".0", scope, fixenv)
        elif isinstance(node, (Or, And)):
            fl, cl, xl = walk(node.left, addr + ".0", scope, fixenv)
            fr, cr, xr = walk(node.right, addr + ".1", scope, fixenv)
            fv, consts, ffix = fl | fr, cl | cr, xl | xr
        elif isinstance(node, (OrbitOr, OrbitAnd)):
            inner = scope | set(node.vars)
            fb, cb, ffix = walk(node.body, addr + ".0", inner, fixenv)
            names = constraint_names(node.where)
            fv = (fb | (names & inner)) - set(node.vars)
            consts = cb | (names - inner)
        elif isinstance(node, Fix):
            own = {eq.name for eq in node.equations}
            p: frozenset = frozenset()
            while True:
                env = dict(fixenv)
                for i, eq in enumerate(node.equations):
                    env[eq.name] = (addr, i, tuple(sorted(p)))
                body_fv, consts, ffix = set(), set(), set()
                for i, eq in enumerate(node.equations):
                    inner = scope | set(eq.params)
                    fb, cb, xb = walk(eq.body, f"{addr}.{i}", inner, env)
                    gnames = constraint_names(eq.guard)
                    body_fv |= (fb | (gnames & inner)) - set(eq.params)
                    consts |= cb | (gnames - inner)
                    ffix |= xb
                new_p = frozenset(body_fv)
                if new_p == p:
                    break
                p = new_p
            info.fix_p[addr] = tuple(sorted(p))
            fv = set(p) | term_vars(node.entry_args, scope)
            consts |= term_consts(node.entry_args, scope)
            ffix = ffix - own
        else:
            raise InputError(f"无法识别的公式节点：{node!r}")
        info.fv[addr] = tuple(sorted(fv))
        info.consts[addr] = frozenset(consts)
        info.freefix[addr] = frozenset(ffix)
        return set(fv), set(consts), set(ffix)

    _, consts, _ = walk(f, "r", frozenset(), {})
    info.constants = set(consts)
    return info


def free_variables(f) -> set[str]:
    """自由不动点变量"""
    return set(analyze(f).freefix["r"])


def free_atom_variables(f) -> set[str]:
    """根处未被绑定的项名；对闭公式而言它们都必须是上下文常量"""
    return set(analyze(f).constants)


def formula_support(f) -> tuple[str, ...]:
    """公式的最小支撑：它提到的常量"""
    return tuple(sorted(analyze(f).constants))


def uses_order(f) -> bool:
    """公式是否用到序比较"""

    def walk(node) -> bool:
        if isinstance(node, (OrbitOr, OrbitAnd)) and _has_order(node.where):
            return True
        if isinstance(node, Fix) and any(_has_order(eq.guard) for eq in node.equations):
            return True
        return any(walk(c) for _, c in children(node))

    return walk(f)


# ---------------------------------------------------------------------------
# 校验与换名
# ---------------------------------------------------------------------------

def validate(f) -> None:
    """正性、路径上不重复绑定、方程组良构性"""

    def walk(node, polarity: dict, arity: dict):
        if isinstance(node, Var):
            if node.name in polarity:
                if polarity[node.name]:
                    raise ValidationError(f"不动点变量 {node.name} 出现在负位置")
                if arity[node.name] != len(node.args):
                    raise ValidationError(f"变量 {node.name} 的参数个数应为 {arity[node.name]}")
            return
        if isinstance(node, Not):
            walk(node.body, {k: not v for k, v in polarity.items()}, arity)
            return
        if isinstance(node, Fix):
            if node.kind not in DUAL:
                raise ValidationError(f"未知不动点类型：{node.kind}")
            names = [eq.name for eq in node.equations]
            if len(set(names)) != len(names):
                raise ValidationError(f"方程左侧变量重复：{names}")
            if node.entry not in names:
                raise ValidationError(f"入口变量 {node.entry} 没有对应方程")
            for eq in node.equations:
                if eq.name in polarity:
                    raise ValidationError(f"变量 {eq.name} 在同一路径上被重复绑定")
                if len(set(eq.params)) != len(eq.params):
                    raise ValidationError(f"方程 {eq.name} 的参数重复")
            if len(node.entry_args) != len(node.equation(node.entry).params):
                raise ValidationError(f"入口 {node.entry} 的参数个数不匹配")
            inner_pol = dict(polarity)
            inner_arity = dict(arity)
            for eq in node.equations:
                inner_pol[eq.name] = False
                inner_arity[eq.name] = len(eq.params)
            for eq in node.equations:
                walk(eq.body, inner_pol, inner_arity)
            return
        if isinstance(node, (OrbitOr, OrbitAnd)) and len(set(node.vars)) != len(node.vars):
            raise ValidationError(f"绑定变量重复：{list(node.vars)}")
        for _, child in children(node):
            walk(child, polarity, arity)

    walk(f, {}, {})


def _all_names(f) -> set[str]:
    names: set[str] = set()

    def walk(node):
        if isinstance(node, (Pred, Var)):
            names.update(node.args)
            if isinstance(node, Var):
                names.add(node.name)
        elif isinstance(node, (OrbitOr, OrbitAnd)):
            names.update(node.vars)
            names.update(constraint_names(node.where))
        elif isinstance(node, Fix):
            names.update(node.entry_args)
            for eq in node.equations:
                names.add(eq.name)
                names.update(eq.params)
                names.update(constraint_names(eq.guard))
        for _, child in children(node):
            walk(child)

    walk(f)
    return names


def rename_apart(f, rename_fixpoints: bool = True):
    """
    给所有原子绑定变量分配全局唯一的名字；
    rename_fixpoints 为真时，同一路径上被重复绑定的不动点变量按绑定深度改名
    """
    used = _all_names(f)
    seen_atoms: set[str] = set()

    def fresh(name: str) -> str:
        i = 1
        while f"{name}_{i}" in used:
            i += 1
        new = f"{name}_{i}"
        used.add(new)
        return new

    def bind(name: str) -> str:
        if name in seen_atoms:
            return fresh(name)
        seen_atoms.add(name)
        return name

    def walk(node, amap: dict, fmap: dict, depth: int):
        if isinstance(node, Pred):
            return Pred(node.tag, tuple(amap.get(a, a) for a in node.args))
        if isinstance(node, Var):
            return Var(fmap.get(node.name, node.name), tuple(amap.get(a, a) for a in node.args))
        if isinstance(node, (OrbitOr, OrbitAnd)):
            inner = dict(amap)
            new_vars = []
            for v in node.vars:
                inner[v] = bind(v)
                new_vars.append(inner[v])
            where = rename_constraint(node.where, inner)
            return type(node)(tuple(new_vars), where, walk(node.body, inner, fmap, depth + 1))
        if isinstance(node, Fix):
            inner_f = dict(fmap)
            for eq in node.equations:
                if eq.name in fmap.values() or eq.name in fmap:
                    if not rename_fixpoints:
                        raise ValidationError(f"变量 {eq.name} 在同一路径上被重复绑定")
                    new = f"{eq.name}_{depth}"
                    while new in used:
                        new += "_"
                    used.add(new)
                    inner_f[eq.name] = new
                else:
                    inner_f[eq.name] = eq.name
            equations = []
            for eq in node.equations:
                inner_a = dict(amap)
                params = []
                for v in eq.params:
                    inner_a[v] = bind(v)
                    params.append(inner_a[v])
                equations.append(Equation(inner_f[eq.name], tuple(params),
                                          rename_constraint(eq.guard, inner_a),
                                          walk(eq.body, inner_a, inner_f, depth + 1)))
            return Fix(node.kind, tuple(equations), inner_f[node.entry],
                       tuple(amap.get(a, a) for a in node.entry_args))
        return _map_children(node, lambda c: walk(c, amap, fmap, depth + 1))

    return walk(f, {}, {}, 0)


def parse_formula(text: str, rename: bool = True):
    """解析公式 DSL；rename 为假时路径上的重复绑定报错"""
    from app.dsl import parse_formula_text

    f = rename_apart(parse_formula_text(text), rename_fixpoints=rename)
    validate(f)
    return f


# ---------------------------------------------------------------------------
# 打印
# ---------------------------------------------------------------------------

def _terms(args) -> str:
    return ", ".join(args)


def print_formula(f) -> str:
    def atomic(node) -> bool:
        return isinstance(node, (Const, Pred, Var))

    def wrap(node) -> str:
        text = show(node)
        return text if atomic(node) else f"({text})"

    def where(c) -> str:
        return "" if c == TRUE else f" where {format_constraint(c)}"

    def show(node) -> str:
        if isinstance(node, Const):
            return "true" if node.value else "false"
        if isinstance(node, Pred):
            return f"{node.tag}({_terms(node.args)})"
        if isinstance(node, Var):
            return f"{node.name}({_terms(node.args)})" if node.args else node.name
        if isinstance(node, Not):
            return f"~{wrap(node.body)}"
        if isinstance(node, Diamond):
            return f"<> {wrap(node.body)}"
        if isinstance(node, Box):
            return f"[] {wrap(node.body)}"
        if isinstance(node, Or):
            return f"{wrap(node.left)} \\/ {wrap(node.right)}"
        if isinstance(node, And):
            return f"{wrap(node.left)} /\\ {wrap(node.right)}"
        if isinstance(node, (OrbitOr, OrbitAnd)):
            kw = "OR" if isinstance(node, OrbitOr) else "AND"
            head = f"{kw} {_terms(node.vars)}" if node.vars else kw
            return f"{head}{where(node.where)} . {show(node.body)}"
        if isinstance(node, Fix):
            if node.is_scalar:
                return f"{node.kind} {node.entry} . {show(node.equations[0].body)}"
            eqs = " ; ".join(f"{eq.name}({_terms(eq.params)}){where(eq.guard)} := {show(eq.body)}"
                             for eq in node.equations)
            return f"{node.kind} {node.entry}({_terms(node.entry_args)}) {{ {eqs} }}"
        raise InputError(f"无法打印的公式节点：{node!r}")

    return show(f)


# ---------------------------------------------------------------------------
# 变换
# ---------------------------------------------------------------------------

def nnf(f):
    """否定范式：否定只出现在谓词和自由变量前"""

    def go(node, neg: bool, flip: frozenset):
        if isinstance(node, Const):
            return Const(node.value != neg)
        if isinstance(node, Pred):
            return Not(node) if neg else node
        if isinstance(node, Var):
            negated = neg != (node.name in flip)
            return Not(node) if negated else node
        if isinstance(node, Not):
            return go(node.body, not neg, flip)
        if isinstance(node, Or):
            cls = And if neg else Or
            return cls(go(node.left, neg, flip), go(node.right, neg, flip))
        if isinstance(node, And):
            cls = Or if neg else And
            return cls(go(node.left, neg, flip), go(node.right, neg, flip))
        if isinstance(node, OrbitOr):
            cls = OrbitAnd if neg else OrbitOr
            return cls(node.vars, node.where, go(node.body, neg, flip))
        if isinstance(node, OrbitAnd):
            cls = OrbitOr if neg else OrbitAnd
            return cls(node.vars, node.where, go(node.body, neg, flip))
        if isinstance(node, Diamond):
            return (Box if neg else Diamond)(go(node.body, neg, flip))
        if isinstance(node, Box):
            return (Diamond if neg else Box)(go(node.body, neg, flip))
        if isinstance(node, Fix):
            names = frozenset(eq.name for eq in node.equations)
            inner_flip = (flip | names) if neg else (flip - names)
            equations = tuple(replace(eq, body=go(eq.body, neg, inner_flip)) for eq in node.equations)
            return Fix(DUAL[node.kind] if neg else node.kind, equations, node.entry, node.entry_args)
        raise InputError(f"无法识别的公式节点：{node!r}")

    return go(f, False, frozenset())


def is_nnf(f) -> bool:
    if isinstance(f, Not):
        return isinstance(f.body, (Pred, Var))
    return all(is_nnf(c) for _, c in children(f))


def negate_variables(f, names: Iterable[str]):
    """把 names 中变量的每个出现替换为其否定（用于 ν 的对偶求值）"""
    names = frozenset(names)

    def go(node):
        if isinstance(node, Var) and node.name in names:
            return Not(node)
        return _map_children(node, go)

    return go(f)


def substitute(f, mapping: dict):
    """把变量出现 X(w) 替换为 mapping[X](w)"""

    def go(node):
        if isinstance(node, Var) and node.name in mapping:
            return mapping[node.name](node.args)
        return _map_children(node, go)

    return go(f)


def alternation_depths(f) -> dict[str, int]:
    """每个方程组地址的交替深度（带依赖检查的 Niwiński 定义）"""
    info = analyze(f)
    depth: dict[str, int] = {}

    def alpha(addr: str) -> int:
        node = info.nodes[addr]
        kids = [alpha(f"{addr}.{suffix}") for suffix, _ in children(node)]
        best = max(kids, default=0)
        if not isinstance(node, Fix):
            return best
        names = {eq.name for eq in node.equations}
        value = max(1, best)
        prefix = addr + "."
        for other, sub in info.nodes.items():
            if (other.startswith(prefix) and isinstance(sub, Fix) and sub.kind != node.kind
                    and info.freefix[other] & names):
                value = max(value, depth[other] + 1)
        depth[addr] = value
        return value

    alpha("r")
    return depth


def alternation_depth(f) -> int:
    return max(alternation_depths(f).values(), default=0)


def fix_rank(kind: str, depth: int) -> int:
    """μ 绑定变量取不小于深度的最小奇数，ν 取最小偶数"""
    parity = 1 if kind == "mu" else 0
    return depth if depth % 2 == parity else depth + 1


def _max_distinct(terms: list[str], consts: list[str], path: list[Constraint]) -> int:
    relevant = [c for c in path if constraint_names(c) & set(terms)]
    if not relevant or not terms:
        return len(terms) + len(consts)
    names = set(terms) | set(consts)
    for c in relevant:
        names |= constraint_names(c)
    ordered = any(_has_order(c) for c in relevant)
    sort = AtomSort.ORDERED if ordered else AtomSort.EQUALITY
    var_list = sorted(names)
    distinct = [Literal("!=", a, b) for a, b in itertools.combinations(sorted(consts), 2)]
    types = complete(conj(*relevant, *distinct), var_list, SupportContext.empty(sort))
    idx = [var_list.index(t) for t in list(terms) + list(consts)]
    return max((len({t.ranks[i] for i in idx}) for t in types), default=0)


def _has_order(c) -> bool:
    if isinstance(c, Literal):
        return c.op not in ("=", "!=")
    if hasattr(c, "parts"):
        return any(_has_order(p) for p in c.parts)
    if hasattr(c, "part"):
        return _has_order(c.part)
    return False


def global_support_bound(f) -> int:
    """沿根到子公式路径累加各析取/合取分支的支撑大小，取最大值"""
    info = analyze(f)

    def supp_size(addr: str, path: list) -> int:
        return _max_distinct(list(info.fv[addr]), sorted(info.consts[addr]), path)

    def walk(addr: str, acc: int, path: list) -> int:
        node = info.nodes[addr]
        best = acc
        if isinstance(node, (Or, And)):
            for suffix in ("0", "1"):
                child = f"{addr}.{suffix}"
                best = max(best, walk(child, acc + supp_size(child, path), path))
        elif isinstance(node, (OrbitOr, OrbitAnd)):
            child = addr + ".0"
            inner = path + [node.where]
            best = max(best, walk(child, acc + supp_size(child, inner), inner))
        elif isinstance(node, Fix):
            for i, eq in enumerate(node.equations):
                child = f"{addr}.{i}"
                inner = path + [eq.guard]
                step = 0 if node.is_scalar else supp_size(child, inner)
                best = max(best, walk(child, acc + step, inner))
        else:
            for suffix, _ in children(node):
                best = max(best, walk(f"{addr}.{suffix}", acc, path))
        return best

    return walk("r", 0, [])


def _split_equation(eq: Equation, p: tuple, constants: set) -> list[tuple[Equation, Constraint]]:
    """把方程按索引集合（相对 P 与公式常量）的轨道拆开"""
    consts = sorted(constraint_names(eq.guard) & constants)
    names = list(p) + list(eq.params) + consts
    distinct = [Literal("!=", a, b) for a, b in itertools.combinations(consts, 2)]
    sort = AtomSort.ORDERED if _has_order(eq.guard) else AtomSort.EQUALITY
    types = complete(conj(eq.guard, *distinct), names, SupportContext.empty(sort))
    if len(types) <= 1:
        return [(eq, eq.guard)]
    pieces = []
    for i, t in enumerate(types):
        guard = type_constraint(t, names, SupportContext.empty(sort))
        pieces.append((Equation(f"{eq.name}_{i}", eq.params, guard, eq.body), guard))
    return pieces


def bekic_single_orbit(f):
    """把每个方程组化为嵌套的单轨道方程组"""
    f = rename_apart(f)
    info = analyze(f)

    def go(node, addr: str):
        if not isinstance(node, Fix):
            return _rebuild(node, addr)
        node = Fix(node.kind, tuple(replace(eq, body=go(eq.body, f"{addr}.{i}"))
                                    for i, eq in enumerate(node.equations)),
                   node.entry, node.entry_args)
        p = info.fix_p[addr]
        split: list[Equation] = []
        routes: dict[str, list[tuple[Equation, Constraint]]] = {}
        for eq in node.equations:
            pieces = _split_equation(eq, p, info.constants)
            routes[eq.name] = pieces
            split.extend(piece for piece, _ in pieces)
        if len(split) == len(node.equations):
            equations = list(node.equations)
        else:
            def router(name):
                def build(args):
                    options = []
                    for piece, guard in routes[name]:
                        mapping = dict(zip(piece.params, args))
                        options.append(OrbitOr((), rename_constraint(guard, mapping), Var(piece.name, args)))
                    result = options[0]
                    for option in options[1:]:
                        result = Or(result, option)
                    return result
                return build

            mapping = {name: router(name) for name in routes}
            equations = [replace(eq, body=substitute(eq.body, mapping)) for eq in split]
            entry_pieces = routes[node.entry]
            if len(entry_pieces) > 1:
                options = []
                for piece, guard in entry_pieces:
                    cond = rename_constraint(guard, dict(zip(piece.params, node.entry_args)))
                    options.append(OrbitOr((), cond, _eliminate(node.kind, equations, piece.name, node.entry_args)))
                result = options[0]
                for option in options[1:]:
                    result = Or(result, option)
                return result
            return _eliminate(node.kind, equations, entry_pieces[0][0].name, node.entry_args)
        return _eliminate(node.kind, equations, node.entry, node.entry_args)

    def _rebuild(node, addr):
        if isinstance(node, (Not, Diamond, Box)):
            return type(node)(go(node.body, addr + ".0"))
        if isinstance(node, (Or, And)):
            return type(node)(go(node.left, addr + ".0"), go(node.right, addr + ".1"))
        if isinstance(node, (OrbitOr, OrbitAnd)):
            return type(node)(node.vars, node.where, go(node.body, addr + ".0"))
        return node

    result = rename_apart(go(f, "r"))
    validate(result)
    return result


def _eliminate(kind: str, equations: list[Equation], entry: str, args: tuple):
    """Bekić 消元：入口方程保留，其余方程以嵌套不动点代入"""
    if len(equations) == 1:
        return Fix(kind, (equations[0],), entry, args)
    target = next(eq for eq in equations if eq.name == entry)
    others = [eq for eq in equations if eq.name != entry]
    mapping = {eq.name: (lambda name: lambda w: _eliminate(kind, others, name, w))(eq.name) for eq in others}
    body = substitute(target.body, mapping)
    return Fix(kind, (replace(target, body=body),), entry, args)


# ---------------------------------------------------------------------------
# 公式库
# ---------------------------------------------------------------------------

_PSI = "AND a . <> (p(a) /\\ (AND b where b != a . ~p(b)))"
_P1 = "nu X . ((<> (OR a . p(a))) /\\ [] X)"
_P2 = "~(mu X . ((OR a . (p(a) /\\ <> (mu Y . (p(a) \\/ <> Y)))) \\/ <> X))"
_P1_PRIME = ("AND a, b where a < b . nu X . ((<> (OR c where a < c and c < b . p(c))) /\\ [] X)")
_INFSUCC = "OR a, b where a < b . AND c where a < c and c < b . <> p(c)"
_THETA = "(p({b}) /\\ (AND {d} where {d} != {b} . ~p({d})))"
_CHAIN = ("OR a . nu X(a) {{ X(b) := OR c . ({theta_c} /\\ <> ({theta_b} /\\ <> X(c))) }}")
_PHI1 = "(<> p({y}) /\\ (AND {f} where {x} < {f} and {f} < {y} . ~(<> p({f}))))"
_EVENSUCC = (
    "OR a . AND b where b < a . mu X(b) {{ X(e) where e >= b := "
    "(AND c where c > e . ~(<> p(c))) \\/ "
    "(OR c where c > e . ((OR d where e < d and d < c . ({phi_ed} /\\ {phi_dc})) /\\ X(c))) }}"
)
_VECTOR_INCREASING = "OR a . nu X(a) { X(b) := (<> p(b)) /\\ (OR c where c > b . X(c)) }"

FORMULA_SOURCES: dict[str, str] = {
    "psi": _PSI,
    "P1": _P1,
    "P2": _P2,
    "P1andP2": f"({_P1}) /\\ ({_P2})",
    "P1'": _P1_PRIME,
    "infpath": "nu X . <> X",
    "infsucc-definer": _INFSUCC,
    "chain-definer": _CHAIN.format(theta_c=_THETA.format(b="c", d="d"), theta_b=_THETA.format(b="b", d="g")),
    "evensucc-definer": _EVENSUCC.format(phi_ed=_PHI1.format(x="e", y="d", f="f"),
                                         phi_dc=_PHI1.format(x="d", y="c", f="h")),
    "vector-increasing": _VECTOR_INCREASING,
    "succ-label": "OR a . <> p(a)",
    "label-succ": "<> (OR a . p(a))",
    "all-succ": "AND a . <> p(a)",
    "no-label": "AND a . ~p(a)",
    "reach-label": "mu X . ((OR a . p(a)) \\/ <> X)",
    "all-succ-labeled": "[] (OR a . p(a))",
    "dead": "[] false",
    "true": "true",
}

ORDERED_ONLY = frozenset({"P1'", "infsucc-definer", "evensucc-definer", "vector-increasing"})


def builtin_formula(name: str, sort: Optional[AtomSort] = None):
    """公式库条目；需要序原子的条目在等式原子上报错"""
    if name not in FORMULA_SOURCES:
        raise NotFoundError(f"未知内置公式：{name}")
    if sort is AtomSort.EQUALITY and name in ORDERED_ONLY:
        raise InputError(f"公式 {name} 需要序原子")
    return parse_formula(FORMULA_SOURCES[name])


def has_vectorial(f) -> bool:
    if isinstance(f, Fix) and not f.is_scalar:
        return True
    return any(has_vectorial(c) for _, c in children(f))
