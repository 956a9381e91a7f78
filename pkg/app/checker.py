"""
符号模型检测

每个子公式的语义是一个轨道有限集合：元素是 (状态标签, 完全类型)，
类型覆盖该子公式的自由原子变量（排序后）再接状态参数。
不动点以同时 Kleene 迭代求解，每个方程的关系覆盖 P + 参数 + 状态参数。
"""
from __future__ import annotations

import itertools
from typing import Mapping, Optional

from app.atoms import (
    AtomSort, TRUE, check_compiled, compile_constraint, evaluate_constraint,
    complete, reindex, rename_constraint, type_of,
)
from app.config import MAX_FIXPOINT_ROUNDS, logger
from app.formulas import (
    And, Box, Const, Diamond, Equation, Fix, Not, Or, OrbitAnd, OrbitOr, Pred, Var,
    analyze, children, substitute,
)
from app.kripke import KripkeModel
from app.orbits import Element, Orbit, OrbitRelation, OrbitSet, PairOrbit, concretize, join_types
from app.utils import InputError, InvariantViolation, PoolTooSmallError, UnsupportedModelError

Environment = Mapping[str, OrbitRelation]


class Evaluator:
    """单个公式在单个模型上的符号求值；按地址缓存闭子公式的值"""

    def __init__(self, model: KripkeModel, formula, env: Optional[Environment] = None):
        if model.orbit_infinite:
            raise UnsupportedModelError("模型不是轨道有限的，无法做符号模型检测")
        self.model = model
        self.ctx = model.ctx
        self.k = model.ctx.size
        self.info = analyze(formula)
        self.sat = model.sat_index
        self._var_types: dict[int, list] = {}
        self._universe: dict[int, frozenset] = {}
        self._joint: dict[int, list] = {}
        self._lifted: dict[int, dict] = {}
        self._memo: dict[str, frozenset] = {}
        self.rounds = 0
        self.env: dict = {}
        for name, rel in (env or {}).items():
            orbits = set()
            for p in rel:
                if p.left != name:
                    raise InputError(f"环境中变量 {name} 的关系左标签应为 {name}")
                orbits.add(Orbit(p.right, p.type))
            arity = rel.pairs[0].left_arity if rel.pairs else 0
            self.env[name] = ((), arity, frozenset(orbits))

    # -- 基础 --------------------------------------------------------------

    def var_types(self, n: int) -> list:
        if n not in self._var_types:
            self._var_types[n] = complete(TRUE, [f"v{i}" for i in range(n)], self.ctx)
        return self._var_types[n]

    def universe(self, n: int) -> frozenset:
        """全部 (状态, n 个变量) 的轨道"""
        if n not in self._universe:
            found = set()
            for tv in self.var_types(n):
                for s in self.model.states:
                    for e in join_types(tv, s.type):
                        found.add(Orbit(s.tag, e))
            self._universe[n] = frozenset(found)
        return self._universe[n]

    def joint_transitions(self, n: int) -> list:
        """(转移轨道, 覆盖 n 个变量 + 源参数 + 目标参数的联合类型) 列表"""
        if n not in self._joint:
            self._joint[n] = [(p, e) for tv in self.var_types(n) for p in self.model.trans
                              for e in join_types(tv, p.type)]
        return self._joint[n]

    def transition_maps(self, n: int, p: PairOrbit) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
        k = self.k
        vs = tuple(range(k, k + n))
        xs = tuple(range(k + n, k + n + p.left_arity))
        ys = tuple(range(k + n + p.left_arity, k + n + p.left_arity + p.right_arity))
        return vs, xs, ys

    def lifted_transitions(self, n: int) -> dict:
        if n not in self._lifted:
            table: dict[Orbit, list[Orbit]] = {}
            for p, e in self.joint_transitions(n):
                vs, xs, ys = self.transition_maps(n, p)
                src = Orbit(p.left, reindex(e, vs + xs))
                table.setdefault(src, []).append(Orbit(p.right, reindex(e, vs + ys)))
            self._lifted[n] = table
        return self._lifted[n]

    def sargs(self, o: Orbit, n: int) -> tuple[int, ...]:
        return tuple(range(self.k + n, self.k + o.type.arity))

    def term(self, name: str, vars: tuple) -> int:
        if name in vars:
            return self.k + vars.index(name)
        return self.ctx.index(name)

    def pred_holds(self, o: Orbit, n: int, tag: str, idx: tuple[int, ...]) -> bool:
        s = self.sargs(o, n)
        return PairOrbit(o.tag, len(s), tag, len(idx), reindex(o.type, s + idx)) in self.sat

    def lift(self, value: frozenset, src: tuple, dst: tuple) -> frozenset:
        if src == dst:
            return value
        n = len(dst)
        pos = tuple(self.k + dst.index(v) for v in src)
        return frozenset(o for o in self.universe(n)
                         if Orbit(o.tag, reindex(o.type, pos + self.sargs(o, n))) in value)

    def _lookup(self, vars: tuple, p: tuple, args: tuple, rel: frozenset) -> frozenset:
        """{ o | (P, args) 处的关系值包含 o }"""
        n = len(vars)
        idx = tuple(self.k + vars.index(v) for v in p) + tuple(self.term(a, vars) for a in args)
        return frozenset(o for o in self.universe(n)
                         if Orbit(o.tag, reindex(o.type, idx + self.sargs(o, n))) in rel)

    # -- 求值 --------------------------------------------------------------

    def eval(self, node, addr: str, env: dict) -> frozenset:
        closed = not self.info.freefix[addr]
        if closed and addr in self._memo:
            return self._memo[addr]
        value = self._eval(node, addr, env)
        if closed:
            self._memo[addr] = value
        return value

    def _eval(self, node, addr: str, env: dict) -> frozenset:
        vars = self.info.fv[addr]
        n = len(vars)
        if isinstance(node, Const):
            return self.universe(n) if node.value else frozenset()
        if isinstance(node, Pred):
            idx = tuple(self.term(a, vars) for a in node.args)
            return frozenset(o for o in self.universe(n) if self.pred_holds(o, n, node.tag, idx))
        if isinstance(node, Var):
            if node.name not in env:
                raise InputError(f"自由不动点变量 {node.name} 没有环境赋值")
            p, arity, rel = env[node.name]
            if arity != len(node.args):
                raise InputError(f"变量 {node.name} 的参数个数应为 {arity}")
            return self._lookup(vars, p, node.args, rel)
        if isinstance(node, Not):
            return self.universe(n) - self.eval(node.body, addr + ".0", env)
        if isinstance(node, (Or, And)):
            left = self.lift(self.eval(node.left, addr + ".0", env), self.info.fv[addr + ".0"], vars)
            right = self.lift(self.eval(node.right, addr + ".1", env), self.info.fv[addr + ".1"], vars)
            return left | right if isinstance(node, Or) else left & right
        if isinstance(node, (OrbitOr, OrbitAnd)):
            return self._orbit_junction(node, addr, env)
        if isinstance(node, (Diamond, Box)):
            body = self.eval(node.body, addr + ".0", env)
            table = self.lifted_transitions(n)
            if isinstance(node, Diamond):
                return frozenset(src for src, tgts in table.items() if any(t in body for t in tgts))
            failing = {src for src, tgts in table.items() if any(t not in body for t in tgts)}
            return self.universe(n) - failing
        if isinstance(node, Fix):
            return self._fix(node, addr, env)
        raise InputError(f"无法识别的公式节点：{node!r}")

    def _orbit_junction(self, node, addr: str, env: dict) -> frozenset:
        vars = self.info.fv[addr]
        wide = vars + tuple(node.vars)
        child = addr + ".0"
        body = self.lift(self.eval(node.body, child, env), self.info.fv[child], wide)
        compiled = compile_constraint(node.where, wide, self.ctx)
        keep = tuple(range(self.k, self.k + len(vars)))
        w = len(wide)

        def project(o: Orbit) -> Orbit:
            return Orbit(o.tag, reindex(o.type, keep + self.sargs(o, w)))

        if isinstance(node, OrbitOr):
            return frozenset(project(o) for o in body if check_compiled(compiled, o.type))
        bad = {project(o) for o in self.universe(w) - body if check_compiled(compiled, o.type)}
        return self.universe(len(vars)) - bad

    def _fix(self, node: Fix, addr: str, env: dict) -> frozenset:
        p = self.info.fix_p[addr]
        coords = {eq.name: p + tuple(eq.params) for eq in node.equations}
        guards = {eq.name: compile_constraint(eq.guard, coords[eq.name], self.ctx) for eq in node.equations}
        domain = {eq.name: frozenset(o for o in self.universe(len(coords[eq.name]))
                                     if check_compiled(guards[eq.name], o.type))
                  for eq in node.equations}
        rel = {name: (frozenset() if node.kind == "mu" else domain[name]) for name in domain}
        rounds = 0
        while True:
            inner = dict(env)
            for eq in node.equations:
                inner[eq.name] = (p, len(eq.params), rel[eq.name])
            new = {}
            for i, eq in enumerate(node.equations):
                child = f"{addr}.{i}"
                value = self.lift(self.eval(eq.body, child, inner), self.info.fv[child], coords[eq.name])
                new[eq.name] = value & domain[eq.name]
            rounds += 1
            self.rounds += 1
            if new == rel:
                break
            if rounds > MAX_FIXPOINT_ROUNDS:
                raise InvariantViolation(f"不动点 {node.entry} 超过 {MAX_FIXPOINT_ROUNDS} 轮仍未收敛")
            rel = new
        logger.debug(f"不动点 {node.kind} {node.entry} 在 {rounds} 轮后收敛")
        return self._lookup(self.info.fv[addr], p, node.entry_args, rel[node.entry])


def eval(model: KripkeModel, formula, env: Optional[Environment] = None) -> OrbitSet:
    """满足公式的状态集合"""
    evaluator = Evaluator(model, formula, env)
    value = evaluator.eval(formula, "r", dict(evaluator.env))
    logger.debug(f"模型 {model.name} 上求值完成：{len(value)} 个状态轨道满足，共 {evaluator.rounds} 轮迭代")
    return OrbitSet(model.ctx, tuple(value))


def holds(model: KripkeModel, x: Element, formula, env: Optional[Environment] = None) -> bool:
    orbit = model.element(x)
    return orbit in eval(model, formula, env)


def _nu_to_mu(f):
    if isinstance(f, Fix):
        equations = tuple(Equation(eq.name, eq.params, eq.guard, _nu_to_mu(eq.body)) for eq in f.equations)
        if f.kind == "mu":
            return Fix("mu", equations, f.entry, f.entry_args)
        guards = {eq.name: eq for eq in equations}

        def guarded_negation(name):
            eq = guards[name]

            def build(args):
                body = Not(Var(name, args))
                guard = rename_constraint(eq.guard, dict(zip(eq.params, args)))
                return body if guard == TRUE else OrbitOr((), guard, body)
            return build

        mapping = {eq.name: guarded_negation(eq.name) for eq in equations}
        dual = tuple(Equation(eq.name, eq.params, eq.guard, Not(substitute(eq.body, mapping)))
                     for eq in equations)
        result = Not(Fix("mu", dual, f.entry, f.entry_args))
        entry = guards[f.entry]
        guard = rename_constraint(entry.guard, dict(zip(entry.params, f.entry_args)))
        return result if guard == TRUE else OrbitOr((), guard, result)
    if isinstance(f, (Not, Diamond, Box)):
        return type(f)(_nu_to_mu(f.body))
    if isinstance(f, (Or, And)):
        return type(f)(_nu_to_mu(f.left), _nu_to_mu(f.right))
    if isinstance(f, (OrbitOr, OrbitAnd)):
        return type(f)(f.vars, f.where, _nu_to_mu(f.body))
    return f


def eval_nu_by_negation(model: KripkeModel, formula, env: Optional[Environment] = None) -> OrbitSet:
    """把每个 ν 改写为 ¬μ¬ 后求值，用于与 eval 互相校验"""
    return eval(model, _nu_to_mu(formula), env)


# ---------------------------------------------------------------------------
# 有限池暴力求值
# ---------------------------------------------------------------------------

def _max_scope(f) -> int:
    def walk(node, depth: int) -> int:
        if isinstance(node, (OrbitOr, OrbitAnd)):
            return walk(node.body, depth + len(node.vars))
        if isinstance(node, Fix):
            return max((walk(eq.body, depth + len(eq.params)) for eq in node.equations), default=depth)
        return max([depth] + [walk(c, depth) for _, c in children(node)])

    return walk(f, 0)


def required_pool(model: KripkeModel, formula) -> int:
    """暴力求值需要的新鲜原子个数"""
    return _max_scope(formula) + 2 * model.max_state_arity


def brute_force_eval(model: KripkeModel, formula, extra: Optional[int] = None,
                     env: Optional[Environment] = None) -> OrbitSet:
    """
    在有限原子池上按定义直接求值（仅等式原子），与符号求值互为校验
    """
    if model.sort is not AtomSort.EQUALITY:
        raise PoolTooSmallError("序原子没有忠实的有限原子池")
    need = required_pool(model, formula)
    if extra is None:
        extra = need
    if extra < need:
        raise PoolTooSmallError(f"原子池过小：需要 {need} 个新鲜原子，只给了 {extra} 个")
    ctx = model.ctx
    start = max(ctx.witnesses, default=0) + 1
    pool = list(ctx.witnesses) + list(range(start, start + extra))
    states = concretize(model.states, pool)
    index = {s: i for i, s in enumerate(states)}
    succ = [[j for j, y in enumerate(states) if model.has_transition(x, y)] for x in states]
    universe = frozenset(range(len(states)))
    constants = dict(zip(ctx.names, ctx.witnesses))

    def atom(name: str, values: dict):
        if name in values:
            return values[name]
        if name in constants:
            return constants[name]
        raise InputError(f"未知常量：{name}")

    def labelled(tag: str, args: tuple) -> frozenset:
        found = set()
        for i, s in enumerate(states):
            pt = PairOrbit(s.tag, len(s.args), tag, len(args),
                           type_of(tuple(s.args) + args, ctx))
            if pt in model.sat_index:
                found.add(i)
        return frozenset(found)

    env_values: dict = {}
    for name, rel in (env or {}).items():
        arity = rel.pairs[0].left_arity if rel.pairs else 0
        orbits = frozenset(Orbit(p.right, p.type) for p in rel)
        table = {}
        for args in itertools.product(pool, repeat=arity):
            table[args] = frozenset(i for i, s in enumerate(states)
                                    if Orbit(s.tag, type_of(args + tuple(s.args), ctx)) in orbits)
        env_values[name] = table

    def sem(node, values: dict, fix: dict) -> frozenset:
        if isinstance(node, Const):
            return universe if node.value else frozenset()
        if isinstance(node, Pred):
            return labelled(node.tag, tuple(atom(a, values) for a in node.args))
        if isinstance(node, Var):
            table = fix.get(node.name)
            if table is None:
                raise InputError(f"自由不动点变量 {node.name} 没有环境赋值")
            return table.get(tuple(atom(a, values) for a in node.args), frozenset())
        if isinstance(node, Not):
            return universe - sem(node.body, values, fix)
        if isinstance(node, Or):
            return sem(node.left, values, fix) | sem(node.right, values, fix)
        if isinstance(node, And):
            return sem(node.left, values, fix) & sem(node.right, values, fix)
        if isinstance(node, (OrbitOr, OrbitAnd)):
            disjunctive = isinstance(node, OrbitOr)
            result = frozenset() if disjunctive else universe
            for choice in itertools.product(pool, repeat=len(node.vars)):
                inner = dict(values)
                inner.update(zip(node.vars, choice))
                merged = {**constants, **inner}
                if not evaluate_constraint(node.where, merged, ctx.sort):
                    continue
                body = sem(node.body, inner, fix)
                result = result | body if disjunctive else result & body
            return result
        if isinstance(node, Diamond):
            body = sem(node.body, values, fix)
            return frozenset(i for i in universe if any(j in body for j in succ[i]))
        if isinstance(node, Box):
            body = sem(node.body, values, fix)
            return frozenset(i for i in universe if all(j in body for j in succ[i]))
        if isinstance(node, Fix):
            domains = {}
            for eq in node.equations:
                keys = []
                for args in itertools.product(pool, repeat=len(eq.params)):
                    merged = {**constants, **values, **dict(zip(eq.params, args))}
                    if evaluate_constraint(eq.guard, merged, ctx.sort):
                        keys.append(args)
                domains[eq.name] = keys
            start_value = frozenset() if node.kind == "mu" else universe
            rel = {eq.name: {args: start_value for args in domains[eq.name]} for eq in node.equations}
            rounds = 0
            while True:
                inner_fix = dict(fix)
                inner_fix.update(rel)
                new = {}
                for eq in node.equations:
                    new[eq.name] = {args: sem(eq.body, {**values, **dict(zip(eq.params, args))}, inner_fix)
                                    for args in domains[eq.name]}
                rounds += 1
                if new == rel:
                    break
                if rounds > MAX_FIXPOINT_ROUNDS:
                    raise InvariantViolation("暴力求值的不动点迭代没有收敛")
                rel = new
            entry = tuple(atom(a, values) for a in node.entry_args)
            return rel[node.entry].get(entry, frozenset())
        raise InputError(f"无法识别的公式节点：{node!r}")

    truth = sem(formula, {}, dict(env_values))
    verdict: dict[Orbit, bool] = {}
    for i, s in enumerate(states):
        orbit = Orbit(s.tag, type_of(s.args, ctx))
        value = i in truth
        if verdict.setdefault(orbit, value) != value:
            raise InvariantViolation(f"同一轨道 {s.tag} 的具体状态求值不一致")
    missing = [o for o in model.states if o not in verdict]
    if missing:
        raise PoolTooSmallError(f"原子池不足以实现轨道 {missing[0].tag}")
    return OrbitSet(ctx, tuple(o for o, v in verdict.items() if v))
