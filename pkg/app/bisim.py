"""
k-栈互模拟与 k-互模拟

互模拟博弈被编码成轨道有限的安全博弈：Spoiler 的局面 ⟨x, ā, y, b̄⟩ 属于 ∀，
Duplicator 的应答结点属于 ∃，所有秩为 0（无穷对局归 Duplicator）。
Spoiler 挑选的原子按上下文轨道符号化处理，博弈从初始局面按需展开后交给商博弈求解。
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

from app.atoms import AtomSort, CompleteType, SupportContext, extend, reindex, restrict_context, type_of, witness
from app.checker import holds
from app.config import MAX_GAME_NODES, logger
from app.formulas import global_support_bound, has_vectorial
from app.games import EXISTS, FORALL, AtomicParityGame, winners
from app.kripke import KripkeModel, disjoint_union, pred_set
from app.orbits import Element, Orbit, OrbitRelation, OrbitSet, PairOrbit, least_support
from app.utils import InputError, InvariantViolation


class BisimMode(str, Enum):
    STACK = "stack"
    FULL = "full"


@dataclass(frozen=True)
class BisimKind:
    mode: BisimMode
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise InputError("k 必须是自然数")

    @classmethod
    def stack(cls, k: int) -> "BisimKind":
        return cls(BisimMode.STACK, k)

    @classmethod
    def full(cls, k: int) -> "BisimKind":
        return cls(BisimMode.FULL, k)

    @classmethod
    def parse(cls, mode: str, k: int) -> "BisimKind":
        try:
            return cls(BisimMode(mode), k)
        except ValueError:
            raise InputError(f"未知的互模拟类型：{mode}（应为 stack 或 full）")

    def __str__(self):
        return f"{self.mode.value}({self.k})"


class BisimPosition(NamedTuple):
    """Spoiler 行动前的局面"""
    x: Element
    a: tuple
    y: Element
    b: tuple


# ---------------------------------------------------------------------------
# 合法性
# ---------------------------------------------------------------------------

class _Legality:
    """⟨pred(x), ā⟩ 在原子自同构下的规范描述，按 (状态标签, 上下文类型) 缓存"""

    def __init__(self, m: KripkeModel):
        self.m = m
        self.sort = m.ctx.sort
        self.empty = SupportContext.empty(self.sort)
        self._cache: dict[tuple, tuple] = {}

    def describe(self, x: Element, a: Sequence) -> tuple:
        key = (x.tag, len(x.args), type_of(tuple(x.args) + tuple(a), self.m.ctx))
        if key not in self._cache:
            self._cache[key] = self._describe(x, tuple(a))
        return self._cache[key]

    def _describe(self, x: Element, a: tuple) -> tuple:
        pred = pred_set(self.m, x)
        ctx2 = pred.ctx
        support = ctx2.positions(least_support(pred))
        if self.sort is AtomSort.ORDERED:
            orderings: Iterable[tuple] = (support,)
        else:
            orderings = itertools.permutations(support)
        best = None
        for order in orderings:
            atoms = tuple(ctx2.witnesses[i] for i in order)
            cells = tuple(sorted({(o.tag, restrict_context(o.type, order)) for o in pred}))
            candidate = (type_of(atoms + a, self.empty), cells)
            if best is None or candidate < best:
                best = candidate
        return best

    def legal(self, pos: BisimPosition) -> bool:
        if len(pos.a) != len(pos.b):
            return False
        return self.describe(pos.x, pos.a) == self.describe(pos.y, pos.b)


def legal(m: KripkeModel, x: Element, a: Sequence, y: Element, b: Sequence) -> bool:
    """⟨pred(x), ā⟩ ∼ ⟨pred(y), b̄⟩"""
    m.element(x)
    m.element(y)
    return _Legality(m).legal(BisimPosition(x, tuple(a), y, tuple(b)))


# ---------------------------------------------------------------------------
# 博弈构造
# ---------------------------------------------------------------------------

def pos_tag(xt: str, la: int, yt: str) -> str:
    return f"pos:{xt}:{la}:{yt}"


def _matching(t: CompleteType, new: int, idx: tuple, target: CompleteType) -> list[CompleteType]:
    """t 追加 new 个变量后，在 idx 上的限制恰为 target 的全部扩展"""
    return [e for e in extend(t, new) if reindex(e, idx) == target]


def _similar(e: CompleteType, left: tuple, right: tuple) -> bool:
    """两组位置上的原子元组在空上下文中同轨道"""
    return restrict_context(reindex(e, left), ()) == restrict_context(reindex(e, right), ())


class _BisimGameBuilder:
    def __init__(self, m: KripkeModel, kind: BisimKind):
        self.m = m
        self.kind = kind
        self.ctx = m.ctx
        self.c = m.ctx.size
        self.arity = m.states.arities
        self.trans_from: dict[str, list[PairOrbit]] = {}
        for p in m.trans:
            self.trans_from.setdefault(p.left, []).append(p)
        self.legality = _Legality(m)
        self.layout: dict[str, tuple] = {}
        self.owner: dict[Orbit, int] = {}
        self.moves: list[PairOrbit] = []
        self.queue: deque = deque()
        self._legal: dict[Orbit, bool] = {}

    # -- 局面 -----------------------------------------------------------------

    def _pos_slots(self, xt: str, la: int, yt: str):
        c = self.c
        nx, ny = self.arity[xt], self.arity[yt]
        xs = tuple(range(c, c + nx))
        as_ = tuple(range(c + nx, c + nx + la))
        ys = tuple(range(c + nx + la, c + nx + la + ny))
        bs = tuple(range(c + nx + la + ny, c + nx + la + ny + la))
        return xs, as_, ys, bs

    def position(self, o: Orbit) -> BisimPosition:
        _, xt, la, yt = self.layout[o.tag]
        atoms = witness(o.type, self.ctx)
        nx, ny = self.arity[xt], self.arity[yt]
        return BisimPosition(Element(xt, atoms[:nx]), atoms[nx:nx + la],
                             Element(yt, atoms[nx + la:nx + la + ny]), atoms[nx + la + ny:])

    def is_legal(self, o: Orbit) -> bool:
        if o not in self._legal:
            self._legal[o] = self.legality.legal(self.position(o))
        return self._legal[o]

    def register(self, o: Orbit, owner: int) -> None:
        if o in self.owner:
            return
        self.owner[o] = owner
        if len(self.owner) > MAX_GAME_NODES:
            raise InvariantViolation(f"互模拟博弈超过 {MAX_GAME_NODES} 个结点轨道")
        self.queue.append(o)

    def link(self, src: Orbit, e: CompleteType, right: tuple, tag: str, layout: tuple, owner: int) -> None:
        left = tuple(range(self.c, self.c + src.type.arity))
        self.layout.setdefault(tag, layout)
        dst = Orbit(tag, reindex(e, right))
        self.moves.append(PairOrbit(src.tag, len(left), tag, len(right), reindex(e, left + right)))
        self.register(dst, owner)

    def link_position(self, src: Orbit, e: CompleteType, right: tuple, xt: str, la: int, yt: str) -> None:
        """只有合法的目标局面才连边"""
        tag = pos_tag(xt, la, yt)
        self.layout.setdefault(tag, ("pos", xt, la, yt))
        if self.is_legal(Orbit(tag, reindex(e, right))):
            self.link(src, e, right, tag, ("pos", xt, la, yt), FORALL)

    # -- 展开 -----------------------------------------------------------------

    def build(self, start: Orbit) -> AtomicParityGame:
        self.register(start, FORALL)
        while self.queue:
            o = self.queue.popleft()
            kind = self.layout[o.tag][0]
            if kind == "pos":
                self._spoiler(o)
            elif kind == "model":
                self._reply_model(o)
            else:
                self._reply_atoms(o)
        ctx = self.ctx
        nodes = OrbitSet(ctx, tuple(self.owner))
        exists = OrbitSet(ctx, tuple(o for o, who in self.owner.items() if who == EXISTS))
        game = AtomicParityGame(ctx, nodes, exists, OrbitRelation(ctx, tuple(self.moves)), {}, name="bisim")
        logger.info(f"{self.kind} 互模拟博弈：{len(nodes)} 个结点轨道，{len(game.moves)} 个移动轨道")
        return game

    def _spoiler(self, o: Orbit) -> None:
        _, xt, la, yt = self.layout[o.tag]
        xs, as_, ys, bs = self._pos_slots(xt, la, yt)
        n = o.type.arity
        k = self.kind.k
        for p in self.trans_from.get(xt, ()):
            new = tuple(range(self.c + n, self.c + n + p.right_arity))
            for e in _matching(o.type, p.right_arity, xs + new, p.type):
                tag = f"dup:mL:{p.right}:{la}:{yt}"
                self.link(o, e, new + as_ + ys + bs, tag, ("model", "L", p.right, la, yt), EXISTS)
        for p in self.trans_from.get(yt, ()):
            new = tuple(range(self.c + n, self.c + n + p.right_arity))
            for e in _matching(o.type, p.right_arity, ys + new, p.type):
                tag = f"dup:mR:{xt}:{la}:{p.right}"
                self.link(o, e, xs + as_ + new + bs, tag, ("model", "R", xt, la, p.right), EXISTS)
        whole = tuple(range(self.c, self.c + n))
        if self.kind.mode is BisimMode.STACK:
            if la > 0:
                # 出栈的应答唯一，直接连到出栈后的局面
                tag = pos_tag(xt, la - 1, yt)
                self.link(o, o.type, xs + as_[:-1] + ys + bs[:-1], tag, ("pos", xt, la - 1, yt), FORALL)
            if la < k:
                self._choose(o, whole, "push", xt, la, yt, 1)
        else:
            for length in range(k + 1):
                self._choose(o, whole, "swap", xt, la, yt, length)

    def _choose(self, o: Orbit, whole: tuple, mode: str, xt: str, la: int, yt: str, length: int) -> None:
        """Spoiler 在任一侧挑选 length 个原子"""
        n = o.type.arity
        new = tuple(range(self.c + n, self.c + n + length))
        for e in extend(o.type, length):
            for side in ("L", "R"):
                tag = f"dup:{mode}{side}:{xt}:{la}:{yt}:{length}"
                self.link(o, e, whole + new, tag, ("atoms", mode, side, xt, la, yt, length), EXISTS)

    def _reply_model(self, o: Orbit) -> None:
        _, side, xt, la, yt = self.layout[o.tag]
        xs, as_, ys, bs = self._pos_slots(xt, la, yt)
        n = o.type.arity
        moving, slots = (yt, ys) if side == "L" else (xt, xs)
        for p in self.trans_from.get(moving, ()):
            new = tuple(range(self.c + n, self.c + n + p.right_arity))
            for e in _matching(o.type, p.right_arity, slots + new, p.type):
                if side == "L":
                    self.link_position(o, e, xs + as_ + new + bs, xt, la, p.right)
                else:
                    self.link_position(o, e, new + as_ + ys + bs, p.right, la, yt)

    def _reply_atoms(self, o: Orbit) -> None:
        _, mode, side, xt, la, yt, length = self.layout[o.tag]
        xs, as_, ys, bs = self._pos_slots(xt, la, yt)
        n = o.type.arity
        chosen = tuple(range(self.c + n - length, self.c + n))
        reply = tuple(range(self.c + n, self.c + n + length))
        if side == "L":
            left, right = chosen, reply
        else:
            left, right = reply, chosen
        for e in extend(o.type, length):
            if mode == "push":
                self.link_position(o, e, xs + as_ + left + ys + bs + right, xt, la + 1, yt)
            elif _similar(e, as_ + left, bs + right):
                self.link_position(o, e, xs + left + ys + right, xt, length, yt)


def start_orbit(m: KripkeModel, x: Element, y: Element) -> Orbit:
    m.element(x)
    m.element(y)
    return Orbit(pos_tag(x.tag, 0, y.tag), type_of(tuple(x.args) + tuple(y.args), m.ctx))


def build_bisim_game(m: KripkeModel, kind: BisimKind, x: Element, y: Element) -> tuple[AtomicParityGame, Orbit]:
    """从 ⟨x, ε, y, ε⟩ 可达的互模拟博弈；初始局面不合法时只含一个 Duplicator 的死结点"""
    if m.orbit_infinite:
        raise InputError("互模拟判定要求轨道有限模型")
    builder = _BisimGameBuilder(m, kind)
    start = start_orbit(m, x, y)
    builder.layout[start.tag] = ("pos", x.tag, 0, y.tag)
    if not builder.is_legal(start):
        ctx = m.ctx
        lone = OrbitSet(ctx, (start,))
        logger.info(f"{x} 与 {y} 的初始局面不合法")
        return AtomicParityGame(ctx, lone, lone, OrbitRelation.empty(ctx), {}, name="bisim"), start
    return builder.build(start), start


def decide_bisimilar(m: KripkeModel, x: Element, y: Element, kind: BisimKind) -> bool:
    """⟨x, ε⟩ 与 ⟨y, ε⟩ 是否 kind-互模拟"""
    game, start = build_bisim_game(m, kind, x, y)
    duplicator, _ = winners(game)
    verdict = start in duplicator
    logger.info(f"{x} 与 {y} 的 {kind} 互模拟判定：{verdict}")
    return verdict


def decide_bisimilar_across(m1: KripkeModel, x: Element, m2: KripkeModel, y: Element, kind: BisimKind) -> bool:
    """两个模型之间的互模拟，在不交并上判定"""
    union = disjoint_union(m1, m2)
    return decide_bisimilar(union, Element(f"L_{x.tag}", x.args), Element(f"R_{y.tag}", y.args), kind)


def invariance_check(m: KripkeModel, x: Element, y: Element, kind: BisimKind, formulas: Iterable) -> bool:
    """x 与 y 在每个全局 k-支撑公式上取值相同"""
    agree = True
    for f in formulas:
        bound = global_support_bound(f)
        if bound > kind.k:
            raise InputError(f"公式的全局支撑界 {bound} 超过 k = {kind.k}")
        if kind.mode is BisimMode.STACK and has_vectorial(f):
            raise InputError("栈互模拟只保持标量公式")
        if holds(m, x, f) != holds(m, y, f):
            logger.warning(f"{x} 与 {y} 在某个公式上取值不同")
            agree = False
    return agree


def representatives(m: KripkeModel) -> list[Element]:
    """每个状态轨道的一个代表元"""
    return [Element(o.tag, witness(o.type, m.ctx)) for o in m.states]


def check_reflexive(m: KripkeModel, kind: BisimKind) -> bool:
    return all(decide_bisimilar(m, x, x, kind) for x in representatives(m))


def check_symmetric(m: KripkeModel, x: Element, y: Element, kind: BisimKind) -> bool:
    return decide_bisimilar(m, x, y, kind) == decide_bisimilar(m, y, x, kind)
