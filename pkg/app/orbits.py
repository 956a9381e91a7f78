"""
轨道有限集合

轨道有限集合与关系表示为有限个轨道（构造子标签 + 完全类型）的并，
提供集合代数、成员判定、最小支撑、按子上下文划分轨道、像与原像等运算。
所有值不可变，轨道按规范顺序排序存放。
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

from app.atoms import (
    Atom, CompleteType, Constraint, SupportContext, TRUE,
    complete, extend, format_constraint, refine_context, reindex,
    restrict_context, type_constraint, type_of,
)
from app.utils import InputError


class Element(NamedTuple):
    """具体元素：标签 + 原子参数"""
    tag: str
    args: tuple = ()

    def __str__(self):
        return f"{self.tag}({', '.join(str(a) for a in self.args)})"


class Orbit(NamedTuple):
    tag: str
    type: CompleteType

    @property
    def arity(self) -> int:
        return self.type.arity


class PairOrbit(NamedTuple):
    left: str
    left_arity: int
    right: str
    right_arity: int
    type: CompleteType

    @property
    def left_orbit(self) -> Orbit:
        return Orbit(self.left, reindex(self.type, _left_map(self.type.consts, self.left_arity)))

    @property
    def right_orbit(self) -> Orbit:
        return Orbit(self.right, reindex(self.type, _right_map(self.type.consts, self.left_arity, self.right_arity)))


def _left_map(m: int, left: int) -> tuple[int, ...]:
    return tuple(range(m, m + left))


def _right_map(m: int, left: int, right: int) -> tuple[int, ...]:
    return tuple(range(m + left, m + left + right))


@lru_cache(maxsize=1 << 16)
def join_types(t1: CompleteType, t2: CompleteType) -> tuple[CompleteType, ...]:
    """t1 的变量后接 t2 的变量的全部联合完全类型"""
    m = t1.consts
    tail = _right_map(m, t1.arity, t2.arity)
    return tuple(e for e in extend(t1, t2.arity) if reindex(e, tail) == t2)


def _check_tags(orbits: Iterable) -> None:
    arity: dict[str, int] = {}
    for o in orbits:
        pairs = ((o.tag, o.arity),) if isinstance(o, Orbit) else ((o.left, o.left_arity), (o.right, o.right_arity))
        for tag, n in pairs:
            if arity.setdefault(tag, n) != n:
                raise InputError(f"标签 {tag} 的元数不一致：{arity[tag]} 与 {n}")


@dataclass(frozen=True)
class OrbitSet:
    ctx: SupportContext
    orbits: tuple[Orbit, ...] = ()

    def __post_init__(self):
        canonical = tuple(sorted(set(self.orbits)))
        for o in canonical:
            if o.type.consts != self.ctx.size or o.type.sort is not self.ctx.sort:
                raise InputError(f"轨道 {o.tag} 与上下文不一致")
        _check_tags(canonical)
        object.__setattr__(self, 'orbits', canonical)

    @classmethod
    def of(cls, ctx: SupportContext, orbits: Iterable[Orbit]) -> "OrbitSet":
        return cls(ctx, tuple(orbits))

    @classmethod
    def empty(cls, ctx: SupportContext) -> "OrbitSet":
        return cls(ctx, ())

    @classmethod
    def build(cls, ctx: SupportContext, tag: str, vars: Sequence[str], constraint: Constraint = TRUE) -> "OrbitSet":
        """集合构造式 { tag(vars) | constraint }"""
        return cls(ctx, tuple(Orbit(tag, t) for t in complete(constraint, vars, ctx)))

    @classmethod
    def full(cls, ctx: SupportContext, tag: str, arity: int) -> "OrbitSet":
        return cls.build(ctx, tag, [f"x{i + 1}" for i in range(arity)])

    def __len__(self):
        return len(self.orbits)

    def __iter__(self):
        return iter(self.orbits)

    def __contains__(self, orbit) -> bool:
        return orbit in self.as_frozenset()

    def as_frozenset(self) -> frozenset:
        return frozenset(self.orbits)

    @property
    def arities(self) -> dict[str, int]:
        return {o.tag: o.arity for o in self.orbits}

    def union(self, other: "OrbitSet") -> "OrbitSet":
        return set_algebra("union", self, other)

    def intersect(self, other: "OrbitSet") -> "OrbitSet":
        return set_algebra("intersect", self, other)

    def difference(self, other: "OrbitSet") -> "OrbitSet":
        return set_algebra("difference", self, other)

    def product(self, other: "OrbitSet") -> "OrbitSet":
        return set_algebra("product", self, other)

    def dump(self) -> list[str]:
        return [orbit_line(self.ctx, o) for o in self.orbits]


def orbit_line(ctx: SupportContext, o: Orbit, prefix: str = "x") -> str:
    names = [f"{prefix}{i + 1}" for i in range(o.arity)]
    return f"{o.tag}({', '.join(names)}) where {format_constraint(type_constraint(o.type, names, ctx))}"


def _same_ctx(x, y) -> None:
    if x.ctx != y.ctx:
        raise InputError("上下文不匹配")


def set_algebra(op: str, x: OrbitSet, y: OrbitSet) -> OrbitSet:
    """并、交、差与笛卡尔积"""
    _same_ctx(x, y)
    if op == "union":
        return OrbitSet(x.ctx, x.orbits + y.orbits)
    if op == "intersect":
        ys = y.as_frozenset()
        return OrbitSet(x.ctx, tuple(o for o in x.orbits if o in ys))
    if op == "difference":
        ys = y.as_frozenset()
        return OrbitSet(x.ctx, tuple(o for o in x.orbits if o not in ys))
    if op == "product":
        pairs = []
        for ox in x.orbits:
            for oy in y.orbits:
                pairs.extend(Orbit(f"{ox.tag}*{oy.tag}", t) for t in join_types(ox.type, oy.type))
        return OrbitSet(x.ctx, tuple(pairs))
    raise InputError(f"未知集合运算：{op}")


def complement(x: OrbitSet, universe: OrbitSet) -> OrbitSet:
    return set_algebra("difference", universe, x)


def orbit_of(element: Element, ctx: SupportContext) -> Orbit:
    return Orbit(element.tag, type_of(element.args, ctx))


def member(element: Element, x: OrbitSet) -> bool:
    arity = x.arities.get(element.tag)
    if arity is not None and arity != len(element.args):
        raise InputError(f"元素 {element} 的元数与标签 {element.tag} 不一致")
    return orbit_of(element, x.ctx) in x.as_frozenset()


def equals(x: OrbitSet, y: OrbitSet) -> bool:
    _same_ctx(x, y)
    return x.orbits == y.orbits


def subset(x: OrbitSet, y: OrbitSet) -> bool:
    _same_ctx(x, y)
    return x.as_frozenset() <= y.as_frozenset()


def _supported_by_positions(orbits: frozenset, keep: tuple[int, ...], m: int) -> bool:
    for o in orbits:
        coarse = restrict_context(o.type, keep)
        for fine in refine_context(coarse, keep, m):
            if Orbit(o.tag, fine) not in orbits:
                return False
    return True


def is_supported_by(x: OrbitSet, names: Iterable[str]) -> bool:
    """x 是否是 names 轨道的并"""
    keep = x.ctx.positions(names)
    return _supported_by_positions(x.as_frozenset(), keep, x.ctx.size)


def least_support(x: OrbitSet) -> tuple[str, ...]:
    """最小支撑：c 属于支撑当且仅当 x 不是 (ctx∖{c})-轨道的并"""
    m = x.ctx.size
    orbits = x.as_frozenset()
    needed = []
    for c in range(m):
        keep = tuple(i for i in range(m) if i != c)
        if not _supported_by_positions(orbits, keep, m):
            needed.append(x.ctx.names[c])
    return tuple(needed)


def orbits_under(x: OrbitSet, names: Iterable[str]) -> list[OrbitSet]:
    """把 x 划分为 T-轨道，每个单元是相对子上下文 T 的单轨道集合"""
    names = tuple(names)
    if not is_supported_by(x, names):
        raise InputError(f"常量集合 {list(names)} 不支撑该集合")
    sub = x.ctx.sub(names)
    keep = x.ctx.positions(names)
    cells = sorted({Orbit(o.tag, restrict_context(o.type, keep)) for o in x.orbits})
    return [OrbitSet(sub, (cell,)) for cell in cells]


def count_supported_subsets(x: OrbitSet, names: Iterable[str]) -> int:
    return 2 ** len(orbits_under(x, names))


@dataclass(frozen=True)
class OrbitRelation:
    ctx: SupportContext
    pairs: tuple[PairOrbit, ...] = ()

    def __post_init__(self):
        canonical = tuple(sorted(set(self.pairs)))
        for p in canonical:
            if p.type.consts != self.ctx.size or p.type.arity != p.left_arity + p.right_arity:
                raise InputError(f"关系轨道 {p.left}->{p.right} 与上下文不一致")
        _check_tags(canonical)
        object.__setattr__(self, 'pairs', canonical)

    @classmethod
    def of(cls, ctx: SupportContext, pairs: Iterable[PairOrbit]) -> "OrbitRelation":
        return cls(ctx, tuple(pairs))

    @classmethod
    def empty(cls, ctx: SupportContext) -> "OrbitRelation":
        return cls(ctx, ())

    @classmethod
    def build(cls, ctx: SupportContext, left: str, left_vars: Sequence[str],
              right: str, right_vars: Sequence[str], constraint: Constraint = TRUE) -> "OrbitRelation":
        """关系构造式 { (left(u), right(w)) | constraint }；两侧可以共享变量名"""
        names = list(dict.fromkeys(list(left_vars) + list(right_vars)))
        m = ctx.size
        lmap = tuple(m + names.index(v) for v in left_vars)
        rmap = tuple(m + names.index(v) for v in right_vars)
        pairs = set()
        for t in complete(constraint, names, ctx):
            pairs.add(PairOrbit(left, len(left_vars), right, len(right_vars), reindex(t, lmap + rmap)))
        return cls(ctx, tuple(pairs))

    @classmethod
    def identity(cls, x: OrbitSet) -> "OrbitRelation":
        pairs = []
        for o in x.orbits:
            m, n = o.type.consts, o.arity
            doubled = tuple(range(m, m + n)) * 2
            pairs.append(PairOrbit(o.tag, n, o.tag, n, reindex(o.type, doubled)))
        return cls(x.ctx, tuple(pairs))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def domain(self) -> OrbitSet:
        return OrbitSet(self.ctx, tuple(p.left_orbit for p in self.pairs))

    def range(self) -> OrbitSet:
        return OrbitSet(self.ctx, tuple(p.right_orbit for p in self.pairs))

    def converse(self) -> "OrbitRelation":
        pairs = []
        for p in self.pairs:
            m = p.type.consts
            swap = _right_map(m, p.left_arity, p.right_arity) + _left_map(m, p.left_arity)
            pairs.append(PairOrbit(p.right, p.right_arity, p.left, p.left_arity, reindex(p.type, swap)))
        return OrbitRelation(self.ctx, tuple(pairs))

    def restrict_left(self, x: OrbitSet) -> "OrbitRelation":
        _same_ctx(self, x)
        keep = x.as_frozenset()
        return OrbitRelation(self.ctx, tuple(p for p in self.pairs if p.left_orbit in keep))

    def dump(self) -> list[str]:
        lines = []
        for p in self.pairs:
            left = [f"x{i + 1}" for i in range(p.left_arity)]
            right = [f"y{i + 1}" for i in range(p.right_arity)]
            c = type_constraint(p.type, left + right, self.ctx)
            lines.append(f"{p.left}({', '.join(left)}) -> {p.right}({', '.join(right)}) where {format_constraint(c)}")
        return lines


def image(r: OrbitRelation, x: OrbitSet) -> OrbitSet:
    """{ y | ∃x ∈ X. (x, y) ∈ R }"""
    _same_ctx(r, x)
    keep = x.as_frozenset()
    return OrbitSet(r.ctx, tuple(p.right_orbit for p in r.pairs if p.left_orbit in keep))


def preimage(r: OrbitRelation, y: OrbitSet) -> OrbitSet:
    _same_ctx(r, y)
    keep = y.as_frozenset()
    return OrbitSet(r.ctx, tuple(p.left_orbit for p in r.pairs if p.right_orbit in keep))


def concretize(x: OrbitSet, pool: Sequence[Atom]) -> list[Element]:
    """x 中参数全部取自有限原子池的元素（按规范顺序）"""
    orbits = x.as_frozenset()
    found = []
    for tag, n in sorted(x.arities.items()):
        for args in itertools.product(pool, repeat=n):
            if Orbit(tag, type_of(args, x.ctx)) in orbits:
                found.append(Element(tag, tuple(args)))
    return found
