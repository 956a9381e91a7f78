"""
原子奇偶博弈

博弈的结点、∃ 结点与移动都是轨道有限对象；按上下文轨道取商得到有限博弈，
用递归 Zielonka 算法求解（最大优先级无穷次出现为偶数则 ∃ 胜）。
另外提供求值博弈的构造，用来与模型检测结果互相印证。
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional

from app.atoms import (
    AtomSort, SupportContext, check_compiled, compile_constraint, extend, reindex, type_of,
)
from app.checker import Evaluator, eval as eval_formula
from app.config import MAX_GAME_NODES, logger
from app.dsl import parse_game_text
from app.formulas import (
    And, Box, Const, Diamond, Fix, Not, Or, OrbitAnd, OrbitOr, Pred, Var,
    alternation_depths, fix_rank, is_nnf, nnf,
)
from app.kripke import KripkeModel, context_from_decls, context_lines, pair_line, relation_from_terms
from app.orbits import Element, Orbit, OrbitRelation, OrbitSet, PairOrbit, concretize, join_types, orbit_line
from app.utils import InputError, InvariantViolation, PoolTooSmallError, ValidationError

EXISTS, FORALL = 0, 1


@dataclass(frozen=True)
class AtomicParityGame:
    ctx: SupportContext
    nodes: OrbitSet
    exists_nodes: OrbitSet
    moves: OrbitRelation
    ranks: Mapping[Orbit, int] = field(default_factory=dict)
    name: str = "game"

    def __post_init__(self):
        known = self.nodes.as_frozenset()
        for part in (self.nodes, self.exists_nodes, self.moves):
            if part.ctx != self.ctx:
                raise ValidationError("博弈各部分的上下文不一致")
        if not self.exists_nodes.as_frozenset() <= known:
            raise ValidationError("∃ 结点必须是结点的子集")
        for p in self.moves:
            if p.left_orbit not in known or p.right_orbit not in known:
                raise ValidationError(f"移动 {p.left}->{p.right} 越出结点集合")
        for o, r in self.ranks.items():
            if o not in known:
                raise ValidationError(f"秩定义在不存在的结点 {o.tag} 上")
            if r < 0:
                raise ValidationError("秩必须是自然数")

    def rank(self, o: Orbit) -> int:
        return self.ranks.get(o, 0)


@dataclass(frozen=True)
class OrbitGame:
    """有限博弈：结点按下标编号"""
    nodes: tuple
    exists: frozenset
    edges: tuple
    ranks: tuple

    def __len__(self):
        return len(self.nodes)

    def owner(self, v: int) -> int:
        return EXISTS if v in self.exists else FORALL


class Solution(NamedTuple):
    exists: frozenset
    forall: frozenset
    strategy: dict

    def winner(self, v: int) -> int:
        return EXISTS if v in self.exists else FORALL


# ---------------------------------------------------------------------------
# 商博弈与有限求解
# ---------------------------------------------------------------------------

def quotient(g: AtomicParityGame) -> tuple[OrbitGame, dict]:
    """每个上下文轨道一个结点；返回有限博弈与 轨道 -> 下标 的映射"""
    if len(g.nodes) > MAX_GAME_NODES:
        raise InvariantViolation(f"博弈有 {len(g.nodes)} 个结点轨道，超过上限 {MAX_GAME_NODES}")
    nodes = tuple(g.nodes)
    index = {o: i for i, o in enumerate(nodes)}
    edges: list[set] = [set() for _ in nodes]
    for p in g.moves:
        edges[index[p.left_orbit]].add(index[p.right_orbit])
    exists = frozenset(index[o] for o in g.exists_nodes)
    og = OrbitGame(nodes, exists, tuple(tuple(sorted(e)) for e in edges), tuple(g.rank(o) for o in nodes))
    return og, index


def _predecessors(og: OrbitGame) -> list[list[int]]:
    preds: list[list[int]] = [[] for _ in range(len(og))]
    for v, targets in enumerate(og.edges):
        for w in targets:
            preds[w].append(v)
    return preds


def _attractor(og: OrbitGame, preds, nodes: set, player: int, target: set) -> tuple[set, dict]:
    """子博弈 nodes 中 player 能强制到达 target 的结点及其吸引策略"""
    attr = set(target)
    strategy: dict[int, int] = {}
    count = {v: sum(1 for w in og.edges[v] if w in nodes) for v in nodes}
    queue = deque(target)
    while queue:
        w = queue.popleft()
        for v in preds[w]:
            if v not in nodes or v in attr:
                continue
            if og.owner(v) == player:
                attr.add(v)
                strategy[v] = w
                queue.append(v)
            else:
                count[v] -= 1
                if count[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr, strategy


def _zielonka(og: OrbitGame, preds, nodes: set) -> tuple[list[set], dict]:
    if not nodes:
        return [set(), set()], {}
    d = max(og.ranks[v] for v in nodes)
    p = d % 2
    top = {v for v in nodes if og.ranks[v] == d}
    a, a_strategy = _attractor(og, preds, nodes, p, top)
    regions, strategy = _zielonka(og, preds, nodes - a)
    if not regions[1 - p]:
        result = [set(), set()]
        result[p] = set(nodes)
        combined = dict(strategy)
        combined.update(a_strategy)
        for v in top:
            if og.owner(v) == p:
                combined[v] = next(w for w in og.edges[v] if w in nodes)
        return result, combined
    b, b_strategy = _attractor(og, preds, nodes, 1 - p, regions[1 - p])
    regions2, strategy2 = _zielonka(og, preds, nodes - b)
    result = [set(), set()]
    result[p] = regions2[p]
    result[1 - p] = regions2[1 - p] | b
    combined = dict(strategy2)
    combined.update({v: w for v, w in strategy.items() if v in regions[1 - p]})
    combined.update(b_strategy)
    return result, combined


def solve_finite(og: OrbitGame) -> Solution:
    """
    先处理死结点：∀ 无路可走则 ∃ 胜，反之亦然；剩余部分没有死结点，交给 Zielonka
    """
    preds = _predecessors(og)
    everything = set(range(len(og)))
    stuck_forall = {v for v in everything if not og.edges[v] and og.owner(v) == FORALL}
    won_exists, strategy_exists = _attractor(og, preds, everything, EXISTS, stuck_forall)
    rest = everything - won_exists
    stuck_exists = {v for v in rest if og.owner(v) == EXISTS and not any(w in rest for w in og.edges[v])}
    won_forall, strategy_forall = _attractor(og, preds, rest, FORALL, stuck_exists)
    core = rest - won_forall
    regions, strategy = _zielonka(og, preds, core)
    combined = dict(strategy)
    combined.update(strategy_exists)
    combined.update(strategy_forall)
    exists = frozenset(won_exists | regions[EXISTS])
    forall = frozenset(won_forall | regions[FORALL])
    logger.debug(f"有限博弈 {len(og)} 个结点：∃ 胜 {len(exists)}，∀ 胜 {len(forall)}")
    return Solution(exists, forall, combined)


def winners(g: AtomicParityGame) -> tuple[OrbitSet, OrbitSet]:
    """(∃ 的胜区, ∀ 的胜区)"""
    og, _ = quotient(g)
    solution = solve_finite(og)
    exists = tuple(og.nodes[v] for v in solution.exists)
    forall = tuple(og.nodes[v] for v in solution.forall)
    return OrbitSet(g.ctx, exists), OrbitSet(g.ctx, forall)


# ---------------------------------------------------------------------------
# 博弈 DSL
# ---------------------------------------------------------------------------

def parse_game(text: str, name: str = "game") -> AtomicParityGame:
    decls = parse_game_text(text)
    if decls.labels:
        raise InputError("博弈文件不能包含 label 声明")
    ctx = context_from_decls(decls)
    orbits: list[Orbit] = []
    for tag, vars, c in decls.states:
        orbits.extend(OrbitSet.build(ctx, tag, vars, c).orbits)
    nodes = OrbitSet(ctx, tuple(orbits))
    owned: list[Orbit] = []
    for tag, vars, c in decls.owners:
        owned.extend(OrbitSet.build(ctx, tag, vars, c).orbits)
    ranks: dict[Orbit, int] = {}
    for rank, tag, vars, c in decls.ranks:
        for o in OrbitSet.build(ctx, tag, vars, c):
            if ranks.setdefault(o, rank) != rank:
                raise ValidationError(f"结点 {tag} 的同一轨道被赋予不同的秩")
    moves: list[PairOrbit] = []
    for tag, terms, tag2, terms2, c in decls.trans:
        moves.extend(relation_from_terms(ctx, tag, terms, tag2, terms2, c).pairs)
    return AtomicParityGame(ctx, nodes, OrbitSet(ctx, tuple(owned)), OrbitRelation(ctx, tuple(moves)),
                            {o: r for o, r in ranks.items() if r}, name=name)


def print_game(g: AtomicParityGame) -> str:
    lines = context_lines(g.ctx)
    for o in g.nodes:
        lines.append("node " + orbit_line(g.ctx, o, prefix="_x").replace(" where true", ""))
    for o in g.exists_nodes:
        lines.append("owner " + orbit_line(g.ctx, o, prefix="_x").replace(" where true", ""))
    for o in g.nodes:
        if g.rank(o):
            lines.append(f"rank {g.rank(o)} " + orbit_line(g.ctx, o, prefix="_x").replace(" where true", ""))
    for p in g.moves:
        lines.append(pair_line("edge", "->", g.ctx, p))
    return "\n".join(lines) + "\n"


PAIRS_GAME = """
atoms equality
node Pair(a, b) where a != b
node Atom(a)
owner Pair(a, b) where a != b
edge Pair(a, b) -> Atom(c) where a != b and (c = a or c = b)
edge Atom(a) -> Pair(b, c) where b != c
"""


def pairs_game() -> AtomicParityGame:
    """无序对与原子之间往返的博弈；无序对用 a != b 的有序对表示"""
    return parse_game(PAIRS_GAME, name="pairs")


# ---------------------------------------------------------------------------
# 具体化与随机博弈
# ---------------------------------------------------------------------------

def concretize_game(g: AtomicParityGame, extra: Optional[int] = None) -> tuple[OrbitGame, list[Element]]:
    """
    在原子池（上下文见证 + extra 个新鲜原子）上展开博弈；extra 默认取 2 倍最大元数
    """
    if g.ctx.sort is not AtomSort.EQUALITY:
        raise PoolTooSmallError("序原子没有忠实的有限原子池")
    arity = max((o.arity for o in g.nodes), default=0)
    if extra is None:
        extra = 2 * arity
    if extra < 2 * arity:
        raise PoolTooSmallError(f"原子池过小：需要 {2 * arity} 个新鲜原子")
    start = max(g.ctx.witnesses, default=0) + 1
    pool = list(g.ctx.witnesses) + list(range(start, start + extra))
    elements = concretize(g.nodes, pool)
    index = {e: i for i, e in enumerate(elements)}
    moves = frozenset(g.moves.pairs)
    exists = g.exists_nodes.as_frozenset()
    edges = []
    ranks = []
    owned = set()
    for i, v in enumerate(elements):
        targets = []
        for w in elements:
            t = type_of(tuple(v.args) + tuple(w.args), g.ctx)
            if PairOrbit(v.tag, len(v.args), w.tag, len(w.args), t) in moves:
                targets.append(index[w])
        edges.append(tuple(targets))
        orbit = Orbit(v.tag, type_of(v.args, g.ctx))
        ranks.append(g.rank(orbit))
        if orbit in exists:
            owned.add(i)
    return OrbitGame(tuple(elements), frozenset(owned), tuple(edges), tuple(ranks)), elements


def check_quotient_bisimulation(g: AtomicParityGame, extra: Optional[int] = None) -> bool:
    """具体化博弈到商博弈的结点映射是否保秩、保所有者且满足往返条件"""
    concrete, elements = concretize_game(g, extra)
    og, index = quotient(g)
    image = [index[Orbit(e.tag, type_of(e.args, g.ctx))] for e in elements]
    for v, q in enumerate(image):
        if concrete.ranks[v] != og.ranks[q] or concrete.owner(v) != og.owner(q):
            return False
        forth = {image[w] for w in concrete.edges[v]}
        if forth != set(og.edges[q]):
            return False
    return True


def random_game(rng: random.Random, constants: int = 1, max_rank: int = 3) -> AtomicParityGame:
    """等式原子上的小型随机博弈：标签 A()、B(a)、C(a, b)"""
    ctx = SupportContext(AtomSort.EQUALITY, tuple(f"c{i + 1}" for i in range(constants)),
                         tuple(range(1, constants + 1)))
    candidates = []
    for tag, arity in (("A", 0), ("B", 1), ("C", 2)):
        candidates.extend(OrbitSet.full(ctx, tag, arity).orbits)
    chosen = [o for o in candidates if rng.random() < 0.7] or [candidates[0]]
    nodes = OrbitSet(ctx, tuple(chosen))
    exists = OrbitSet(ctx, tuple(o for o in chosen if rng.random() < 0.5))
    moves = []
    for left in chosen:
        for right in chosen:
            for t in join_types(left.type, right.type):
                if rng.random() < 0.3:
                    moves.append(PairOrbit(left.tag, left.arity, right.tag, right.arity, t))
    ranks = {o: rng.randint(0, max_rank) for o in chosen}
    return AtomicParityGame(ctx, nodes, exists, OrbitRelation(ctx, tuple(moves)),
                            {o: r for o, r in ranks.items() if r}, name="random")


def check_winner_invariance(g: AtomicParityGame, extra: Optional[int] = None) -> bool:
    """具体化博弈的胜者与其轨道在商博弈中的胜者一致"""
    concrete, elements = concretize_game(g, extra)
    og, index = quotient(g)
    concrete_solution = solve_finite(concrete)
    orbit_solution = solve_finite(og)
    for v, e in enumerate(elements):
        q = index[Orbit(e.tag, type_of(e.args, g.ctx))]
        if concrete_solution.winner(v) != orbit_solution.winner(q):
            return False
    return True


# ---------------------------------------------------------------------------
# 求值博弈
# ---------------------------------------------------------------------------

def node_tag(addr: str, state_tag: str) -> str:
    return f"N{addr.replace('.', '_')}__{state_tag}"


class _EvalGameBuilder:
    def __init__(self, model: KripkeModel, formula):
        self.ev = Evaluator(model, formula)
        self.info = self.ev.info
        self.k = self.ev.k
        self.ctx = model.ctx
        self.depths = alternation_depths(formula)
        self.nodes: list[Orbit] = []
        self.exists: list[Orbit] = []
        self.moves: list[PairOrbit] = []
        self.ranks: dict[Orbit, int] = {}
        self._moves_from: dict[int, dict] = {}

    def edge(self, src: Orbit, src_arity: int, dst_addr: str, state: str, joint, left_idx, right_idx):
        """joint 上按下标取出左右两端，登记一条移动"""
        t = reindex(joint, tuple(left_idx) + tuple(right_idx))
        self.moves.append(PairOrbit(src.tag, src_arity, node_tag(dst_addr, state), len(right_idx), t))

    def moves_from(self, n: int) -> dict:
        """源轨道 -> [(转移轨道, 联合类型)]"""
        if n not in self._moves_from:
            table: dict[Orbit, list] = {}
            for p, e in self.ev.joint_transitions(n):
                vs, xs, _ = self.ev.transition_maps(n, p)
                table.setdefault(Orbit(p.left, reindex(e, vs + xs)), []).append((p, e))
            self._moves_from[n] = table
        return self._moves_from[n]

    def _child_map(self, child: str, names: list) -> tuple[int, ...]:
        """子公式自由变量在 names（按项下标排列）中的位置"""
        return tuple(self.k + names.index(v) for v in self.info.fv[child])

    def build(self) -> AtomicParityGame:
        for addr, node in self.info.nodes.items():
            vars = self.info.fv[addr]
            n = len(vars)
            for o in self.ev.universe(n):
                self._node(addr, node, vars, o)
        if len(self.nodes) > MAX_GAME_NODES:
            raise InvariantViolation(f"求值博弈有 {len(self.nodes)} 个结点轨道，超过上限 {MAX_GAME_NODES}")
        ctx = self.ctx
        game = AtomicParityGame(ctx, OrbitSet(ctx, tuple(self.nodes)), OrbitSet(ctx, tuple(self.exists)),
                                OrbitRelation(ctx, tuple(self.moves)),
                                {o: r for o, r in self.ranks.items() if r}, name="eval")
        logger.debug(f"求值博弈：{len(game.nodes)} 个结点轨道，{len(game.moves)} 个移动轨道")
        return game

    def _node(self, addr: str, node, vars: tuple, o: Orbit):
        n = len(vars)
        k = self.k
        src = Orbit(node_tag(addr, o.tag), o.type)
        arity = o.type.arity
        sargs = self.ev.sargs(o, n)
        whole = tuple(range(k, k + arity))
        self.nodes.append(src)
        owner_exists = False
        if isinstance(node, Const):
            owner_exists = not node.value
        elif isinstance(node, Pred):
            idx = tuple(self.ev.term(a, vars) for a in node.args)
            owner_exists = not self.ev.pred_holds(o, n, node.tag, idx)
        elif isinstance(node, Not):
            if not isinstance(node.body, Pred):
                raise InputError("求值博弈要求公式处于否定范式")
            idx = tuple(self.ev.term(a, vars) for a in node.body.args)
            owner_exists = self.ev.pred_holds(o, n, node.body.tag, idx)
        elif isinstance(node, (Or, And)):
            owner_exists = isinstance(node, Or)
            for suffix in ("0", "1"):
                child = f"{addr}.{suffix}"
                self.edge(src, arity, child, o.tag, o.type, whole, self._child_map(child, list(vars)) + sargs)
        elif isinstance(node, (OrbitOr, OrbitAnd)):
            owner_exists = isinstance(node, OrbitOr)
            self._junction(addr, node, vars, o, src)
        elif isinstance(node, (Diamond, Box)):
            owner_exists = isinstance(node, Diamond)
            self._modal(addr, vars, o, src)
        elif isinstance(node, Fix):
            owner_exists = True
            entry = node.equations.index(node.equation(node.entry))
            self._unfold(addr, o, src, vars, addr, entry, node.entry_args)
        elif isinstance(node, Var):
            owner_exists = True
            fix_addr, j = self.info.binding[addr]
            fix = self.info.nodes[fix_addr]
            self._unfold(addr, o, src, vars, fix_addr, j, node.args)
            self.ranks[src] = fix_rank(fix.kind, self.depths[fix_addr])
        if owner_exists:
            self.exists.append(src)

    def _junction(self, addr: str, node, vars: tuple, o: Orbit, src: Orbit):
        k = self.k
        n = len(vars)
        sa = o.type.arity - n
        names = list(vars) + [f"#s{j}" for j in range(sa)] + list(node.vars)
        compiled = compile_constraint(node.where, names, self.ctx)
        child = addr + ".0"
        right = tuple(k + names.index(v) for v in self.info.fv[child]) + tuple(range(k + n, k + n + sa))
        left = tuple(range(k, k + n + sa))
        for e in extend(o.type, len(node.vars)):
            if check_compiled(compiled, e):
                self.edge(src, o.type.arity, child, o.tag, e, left, right)

    def _modal(self, addr: str, vars: tuple, o: Orbit, src: Orbit):
        n = len(vars)
        child = addr + ".0"
        for p, e in self.moves_from(n).get(o, ()):
            vs, xs, ys = self.ev.transition_maps(n, p)
            body = tuple(vs[vars.index(v)] for v in self.info.fv[child])
            self.edge(src, o.type.arity, child, p.right, e, vs + xs, body + ys)

    def _unfold(self, addr: str, o: Orbit, src: Orbit, vars: tuple, fix_addr: str, j: int, args: tuple):
        """展开到第 j 个方程体；守卫不成立时没有移动"""
        k = self.k
        n = len(vars)
        fix = self.info.nodes[fix_addr]
        eq = fix.equations[j]
        p = self.info.fix_p[fix_addr]
        coords = list(p) + list(eq.params)
        coord_idx = [k + vars.index(v) for v in p] + [self.ev.term(a, vars) for a in args]
        sargs = self.ev.sargs(o, n)
        at_coords = reindex(o.type, tuple(coord_idx) + sargs)
        if not check_compiled(compile_constraint(eq.guard, coords, self.ctx), at_coords):
            return
        child = f"{fix_addr}.{j}"
        right = tuple(coord_idx[coords.index(v)] for v in self.info.fv[child]) + sargs
        self.edge(src, o.type.arity, child, o.tag, o.type, tuple(range(k, k + o.type.arity)), right)


def build_eval_game(model: KripkeModel, formula) -> AtomicParityGame:
    """(子公式出现, 状态) 上的求值博弈；公式须为闭的否定范式"""
    if not is_nnf(formula):
        raise InputError("求值博弈要求公式处于否定范式")
    builder = _EvalGameBuilder(model, formula)
    if builder.info.freefix["r"]:
        raise InputError(f"公式含自由不动点变量：{sorted(builder.info.freefix['r'])}")
    return builder.build()


def eval_game_winners(model: KripkeModel, formula) -> OrbitSet:
    """∃ 在根结点上获胜的状态"""
    game = build_eval_game(model, formula)
    won, _ = winners(game)
    won_set = won.as_frozenset()
    return OrbitSet(model.ctx, tuple(s for s in model.states
                                     if Orbit(node_tag("r", s.tag), s.type) in won_set))


def adequacy_check(model: KripkeModel, formula) -> bool:
    """模型检测结果与求值博弈中 ∃ 的胜区一致"""
    normal = formula if is_nnf(formula) else nnf(formula)
    expected = eval_formula(model, formula)
    actual = eval_game_winners(model, normal)
    if expected.orbits != actual.orbits:
        logger.error(f"模型 {model.name} 上求值与博弈胜区不一致")
        return False
    return True
