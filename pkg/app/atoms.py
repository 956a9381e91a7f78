"""
原子内核

判定两种原子结构（纯等式原子、无端点稠密线序原子）上的无量词约束，
并把约束规范化为完全类型。完全类型是“一个轨道”的唯一证书。

完全类型的表示：常量在前、变量在后，每个项记录所在等价块的编号。
- 等式原子：块编号按首次出现顺序分配，常量固定占用 0..m-1；
- 序原子：块编号就是块在全序中的位置（稠密 0..B-1）。
两个完全类型语义相等当且仅当结构相等。
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

from app.utils import InputError

Atom = Union[int, Fraction]


class AtomSort(str, Enum):
    EQUALITY = "equality"
    ORDERED = "ordered"


EQUALITY_OPS = frozenset({"=", "!="})
ORDERED_OPS = frozenset({"=", "!=", "<", "<=", ">", ">="})


def make_atom(sort: AtomSort, value) -> Atom:
    """把输入值规范化为指定种类的原子"""
    if sort is AtomSort.EQUALITY:
        try:
            atom = int(value)
        except (TypeError, ValueError):
            raise InputError(f"等式原子必须是自然数：{value!r}")
        if atom < 0 or (isinstance(value, (float, Fraction)) and atom != value):
            raise InputError(f"等式原子必须是自然数：{value!r}")
        return atom
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise InputError(f"序原子必须是有理数：{value!r}")


@dataclass(frozen=True)
class SupportContext:
    """支撑上下文：带具体见证原子的命名常量表"""
    sort: AtomSort
    names: tuple[str, ...] = ()
    witnesses: tuple[Atom, ...] = ()

    def __post_init__(self):
        if len(self.names) != len(self.witnesses):
            raise InputError("常量名与见证原子数量不一致")
        if len(set(self.names)) != len(self.names):
            raise InputError(f"常量名重复：{self.names}")
        normalized = tuple(make_atom(self.sort, w) for w in self.witnesses)
        object.__setattr__(self, 'witnesses', normalized)
        if len(set(normalized)) != len(normalized):
            raise InputError("常量见证原子必须两两不同")
        if self.sort is AtomSort.ORDERED:
            if any(a >= b for a, b in zip(normalized, normalized[1:])):
                raise InputError("序原子常量的见证必须按声明顺序严格递增")

    @classmethod
    def empty(cls, sort: AtomSort) -> "SupportContext":
        return cls(sort)

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InputError(f"未知常量：{name}")

    def positions(self, names: Iterable[str]) -> tuple[int, ...]:
        """按声明顺序返回一组常量的下标"""
        wanted = set(names)
        for name in wanted:
            self.index(name)
        return tuple(i for i, n in enumerate(self.names) if n in wanted)

    def sub(self, names: Iterable[str]) -> "SupportContext":
        keep = self.positions(names)
        return SupportContext(self.sort,
                              tuple(self.names[i] for i in keep),
                              tuple(self.witnesses[i] for i in keep))

    def with_atoms(self, atoms: Iterable[Atom], prefix: str = "_w") -> "SupportContext":
        """把具体原子作为匿名常量并入上下文（已在上下文中的原子跳过）"""
        pairs = list(zip(self.names, self.witnesses))
        known = set(self.witnesses)
        for atom in atoms:
            if atom not in known:
                known.add(atom)
                pairs.append((f"{prefix}{len(pairs)}", atom))
        if self.sort is AtomSort.ORDERED:
            pairs.sort(key=lambda p: p[1])
        return SupportContext(self.sort, tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


# ---------------------------------------------------------------------------
# 约束
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    op: str
    left: str
    right: str


@dataclass(frozen=True)
class Conj:
    parts: tuple


@dataclass(frozen=True)
class Disj:
    parts: tuple


@dataclass(frozen=True)
class Neg:
    part: object


@dataclass(frozen=True)
class Truth:
    value: bool


TRUE = Truth(True)
FALSE = Truth(False)

Constraint = Union[Literal, Conj, Disj, Neg, Truth]


def conj(*parts: Constraint) -> Constraint:
    flat = []
    for part in parts:
        if part == TRUE:
            continue
        if part == FALSE:
            return FALSE
        flat.extend(part.parts if isinstance(part, Conj) else (part,))
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else Conj(tuple(flat))


def disj(*parts: Constraint) -> Constraint:
    flat = []
    for part in parts:
        if part == FALSE:
            continue
        if part == TRUE:
            return TRUE
        flat.extend(part.parts if isinstance(part, Disj) else (part,))
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Disj(tuple(flat))


def constraint_names(c: Constraint) -> set[str]:
    if isinstance(c, Literal):
        return {c.left, c.right}
    if isinstance(c, (Conj, Disj)):
        return set().union(*(constraint_names(p) for p in c.parts))
    if isinstance(c, Neg):
        return constraint_names(c.part)
    return set()


def rename_constraint(c: Constraint, mapping: dict) -> Constraint:
    if isinstance(c, Literal):
        return Literal(c.op, mapping.get(c.left, c.left), mapping.get(c.right, c.right))
    if isinstance(c, Conj):
        return Conj(tuple(rename_constraint(p, mapping) for p in c.parts))
    if isinstance(c, Disj):
        return Disj(tuple(rename_constraint(p, mapping) for p in c.parts))
    if isinstance(c, Neg):
        return Neg(rename_constraint(c.part, mapping))
    return c


def format_constraint(c: Constraint) -> str:
    if isinstance(c, Literal):
        return f"{c.left} {c.op} {c.right}"
    if isinstance(c, Truth):
        return "true" if c.value else "false"
    if isinstance(c, Neg):
        return f"not ({format_constraint(c.part)})"
    joiner = " and " if isinstance(c, Conj) else " or "
    inner = []
    for part in c.parts:
        text = format_constraint(part)
        if isinstance(part, (Conj, Disj)):
            text = f"({text})"
        inner.append(text)
    return joiner.join(inner)


def _compile(c: Constraint, vars: Sequence[str], ctx: SupportContext):
    """把约束编译为以项下标表示的嵌套元组"""
    m = ctx.size
    var_index = {v: m + i for i, v in enumerate(vars)}
    allowed = EQUALITY_OPS if ctx.sort is AtomSort.EQUALITY else ORDERED_OPS

    def term(name: str) -> int:
        if name in var_index:
            return var_index[name]
        if name in ctx.names:
            return ctx.names.index(name)
        raise InputError(f"未知变量或常量：{name}")

    def walk(node):
        if isinstance(node, Literal):
            if node.op not in allowed:
                raise InputError(f"{ctx.sort.value} 原子不支持比较符 {node.op}")
            return ("lit", node.op, term(node.left), term(node.right))
        if isinstance(node, Conj):
            return ("and", tuple(walk(p) for p in node.parts))
        if isinstance(node, Disj):
            return ("or", tuple(walk(p) for p in node.parts))
        if isinstance(node, Neg):
            return ("not", walk(node.part))
        if isinstance(node, Truth):
            return ("const", node.value)
        raise InputError(f"无法识别的约束：{node!r}")

    return walk(c)


def _compare(op: str, x: int, y: int) -> bool:
    if op == "=":
        return x == y
    if op == "!=":
        return x != y
    if op == "<":
        return x < y
    if op == "<=":
        return x <= y
    if op == ">":
        return x > y
    return x >= y


def evaluate_constraint(c: Constraint, values: dict, sort: AtomSort) -> bool:
    """在具体原子赋值上求约束的真值"""
    allowed = EQUALITY_OPS if sort is AtomSort.EQUALITY else ORDERED_OPS
    if isinstance(c, Literal):
        if c.op not in allowed:
            raise InputError(f"{sort.value} 原子不支持比较符 {c.op}")
        try:
            return _compare(c.op, values[c.left], values[c.right])
        except KeyError as e:
            raise InputError(f"未知变量或常量：{e.args[0]}")
    if isinstance(c, Conj):
        return all(evaluate_constraint(p, values, sort) for p in c.parts)
    if isinstance(c, Disj):
        return any(evaluate_constraint(p, values, sort) for p in c.parts)
    if isinstance(c, Neg):
        return not evaluate_constraint(c.part, values, sort)
    if isinstance(c, Truth):
        return c.value
    raise InputError(f"无法识别的约束：{c!r}")


def _eval3(node, ranks) -> Optional[bool]:
    """三值求值：未放置的项为 None 时返回 None"""
    kind = node[0]
    if kind == "lit":
        x, y = ranks[node[2]], ranks[node[3]]
        if x is None or y is None:
            return None
        return _compare(node[1], x, y)
    if kind == "and":
        result = True
        for part in node[1]:
            value = _eval3(part, ranks)
            if value is False:
                return False
            if value is None:
                result = None
        return result
    if kind == "or":
        result = False
        for part in node[1]:
            value = _eval3(part, ranks)
            if value is True:
                return True
            if value is None:
                result = None
        return result
    if kind == "not":
        value = _eval3(node[1], ranks)
        return None if value is None else not value
    return node[1]


# ---------------------------------------------------------------------------
# 完全类型
# ---------------------------------------------------------------------------

class CompleteType(NamedTuple):
    """完全类型：常量个数 consts 与全部项的块编号 ranks"""
    sort: AtomSort
    consts: int
    ranks: tuple[int, ...]

    @property
    def arity(self) -> int:
        return len(self.ranks) - self.consts

    @property
    def var_ranks(self) -> tuple[int, ...]:
        return self.ranks[self.consts:]


def canonicalize(sort: AtomSort, consts: int, values: Sequence) -> CompleteType:
    """把任意可比较值序列规范化为完全类型"""
    if sort is AtomSort.EQUALITY:
        labels: dict = {}
        ranks = []
        for value in values:
            if value not in labels:
                labels[value] = len(labels)
            ranks.append(labels[value])
        return CompleteType(sort, consts, tuple(ranks))
    order = {value: i for i, value in enumerate(sorted(set(values)))}
    return CompleteType(sort, consts, tuple(order[value] for value in values))


def base_type(ctx: SupportContext) -> CompleteType:
    """零元组的完全类型"""
    return CompleteType(ctx.sort, ctx.size, tuple(range(ctx.size)))


def _placements(sort: AtomSort, ranks: list, index: int) -> Iterator[list]:
    """把第 index 项插入已有块结构的所有方式"""
    placed = [r for r in ranks if r is not None]
    blocks = max(placed) + 1 if placed else 0
    for r in range(blocks):
        step = list(ranks)
        step[index] = r
        yield step
    if sort is AtomSort.EQUALITY:
        step = list(ranks)
        step[index] = blocks
        yield step
        return
    for gap in range(blocks + 1):
        step = [r + 1 if (r is not None and r >= gap) else r for r in ranks]
        step[index] = gap
        yield step


def _enumerate(sort: AtomSort, start: Sequence[int], extra: int, compiled=None) -> list[tuple[int, ...]]:
    total = len(start) + extra
    results = []

    def rec(ranks: list, index: int):
        if compiled is not None:
            verdict = _eval3(compiled, ranks)
            if verdict is False:
                return
        if index == total:
            results.append(tuple(ranks))
            return
        for step in _placements(sort, ranks, index):
            rec(step, index + 1)

    rec(list(start) + [None] * extra, len(start))
    return results


@lru_cache(maxsize=1 << 16)
def extend(t: CompleteType, k: int) -> tuple[CompleteType, ...]:
    """t 的全部 k 个新变量的完全扩展（新变量追加在末尾）"""
    if k == 0:
        return (t,)
    return tuple(CompleteType(t.sort, t.consts, ranks) for ranks in _enumerate(t.sort, t.ranks, k))


def complete(c: Constraint, vars: Sequence[str], ctx: SupportContext) -> list[CompleteType]:
    """返回与约束一致的全部完全类型（回溯补全枚举）"""
    if len(set(vars)) != len(vars):
        raise InputError(f"变量列表重复：{list(vars)}")
    compiled = _compile(c, vars, ctx)
    found = _enumerate(ctx.sort, base_type(ctx).ranks, len(vars), compiled)
    return sorted(CompleteType(ctx.sort, ctx.size, ranks) for ranks in found)


def satisfiable(c: Constraint, vars: Sequence[str], ctx: SupportContext) -> bool:
    return bool(complete(c, vars, ctx))


def holds_on(c: Constraint, vars: Sequence[str], ctx: SupportContext, t: CompleteType) -> bool:
    """约束在完全类型 t 上的真值"""
    return bool(_eval3(_compile(c, vars, ctx), t.ranks))


def compile_constraint(c: Constraint, vars: Sequence[str], ctx: SupportContext):
    """预编译约束，配合 check_compiled 在热路径上使用"""
    return _compile(c, vars, ctx)


def check_compiled(compiled, t: CompleteType) -> bool:
    return bool(_eval3(compiled, t.ranks))


@lru_cache(maxsize=1 << 18)
def reindex(t: CompleteType, mapping: tuple[int, ...]) -> CompleteType:
    """按项下标映射构造新变量列表的类型；下标可以指向常量或变量，也可以重复"""
    values = t.ranks[:t.consts] + tuple(t.ranks[j] for j in mapping)
    return canonicalize(t.sort, t.consts, values)


def project_exists(t: CompleteType, drop: Iterable[int]) -> CompleteType:
    """存在投影：去掉位置在 drop 中的变量（从 0 开始编号）"""
    dropped = set(drop)
    keep = tuple(t.consts + i for i in range(t.arity) if i not in dropped)
    return reindex(t, keep)


def restrict_context(t: CompleteType, keep: tuple[int, ...]) -> CompleteType:
    """把类型限制到常量子集 keep（按声明顺序的下标）上"""
    values = tuple(t.ranks[i] for i in keep) + t.var_ranks
    return canonicalize(t.sort, len(keep), values)


@lru_cache(maxsize=1 << 14)
def refine_context(t: CompleteType, keep: tuple[int, ...], full: int) -> tuple[CompleteType, ...]:
    """restrict_context 的逆：子上下文类型在完整上下文上的全部细化"""
    missing = [i for i in range(full) if i not in keep]
    n = t.arity
    refined = set()
    for e in extend(t, len(missing)):
        const_values = []
        for i in range(full):
            if i in keep:
                const_values.append(e.ranks[keep.index(i)])
            else:
                const_values.append(e.ranks[t.consts + n + missing.index(i)])
        if t.sort is AtomSort.EQUALITY:
            if len(set(const_values)) != full:
                continue
        elif any(a >= b for a, b in zip(const_values, const_values[1:])):
            continue
        var_values = e.ranks[t.consts:t.consts + n]
        refined.add(canonicalize(t.sort, full, tuple(const_values) + tuple(var_values)))
    return tuple(sorted(refined))


def type_of(atoms: Sequence[Atom], ctx: SupportContext) -> CompleteType:
    """元组连同上下文见证所实现的唯一完全类型"""
    values = list(ctx.witnesses) + [make_atom(ctx.sort, a) for a in atoms]
    return canonicalize(ctx.sort, ctx.size, values)


def witness(t: CompleteType, ctx: SupportContext) -> tuple[Atom, ...]:
    """实现完全类型的具体原子；type_of(witness(t)) == t"""
    m = ctx.size
    if t.consts != m:
        raise InputError("完全类型与上下文常量数不一致")
    if t.sort is AtomSort.EQUALITY:
        value = {t.ranks[i]: ctx.witnesses[i] for i in range(m)}
        fresh = max(ctx.witnesses, default=-1) + 1
        for r in t.var_ranks:
            if r not in value:
                value[r] = fresh
                fresh += 1
        return tuple(value[r] for r in t.var_ranks)

    blocks = max(t.ranks) + 1 if t.ranks else 0
    fixed = {t.ranks[i]: ctx.witnesses[i] for i in range(m)}
    value: dict[int, Fraction] = {}
    r = 0
    while r < blocks:
        if r in fixed:
            value[r] = fixed[r]
            r += 1
            continue
        run_end = r
        while run_end < blocks and run_end not in fixed:
            run_end += 1
        lo = fixed.get(r - 1)
        hi = fixed.get(run_end)
        count = run_end - r
        for idx in range(count):
            if lo is None and hi is None:
                value[r + idx] = Fraction(idx)
            elif lo is None:
                value[r + idx] = hi - count + idx
            elif hi is None:
                value[r + idx] = lo + 1 + idx
            else:
                value[r + idx] = lo + (hi - lo) * Fraction(idx + 1, count + 1)
        r = run_end
    return tuple(value[r] for r in t.var_ranks)


def type_constraint(t: CompleteType, var_names: Sequence[str], ctx: SupportContext) -> Constraint:
    """把完全类型写回为约束（合取式）"""
    names = list(ctx.names) + list(var_names)
    m = ctx.size
    if t.arity == 0:
        return TRUE
    literals = []
    if t.sort is AtomSort.EQUALITY:
        rep: dict[int, str] = {t.ranks[i]: names[i] for i in range(m)}
        free_reps: list[str] = []
        for i in range(m, len(t.ranks)):
            r = t.ranks[i]
            if r in rep:
                literals.append(Literal("=", names[i], rep[r]))
                continue
            rep[r] = names[i]
            literals.extend(Literal("!=", names[i], names[c]) for c in range(m))
            literals.extend(Literal("!=", names[i], other) for other in free_reps)
            free_reps.append(names[i])
        return conj(*literals)

    blocks: dict[int, list[int]] = {}
    for i, r in enumerate(t.ranks):
        blocks.setdefault(r, []).append(i)
    reps = []
    for r in sorted(blocks):
        members = blocks[r]
        head = members[0]
        literals.extend(Literal("=", names[i], names[head]) for i in members[1:])
        reps.append(head)
    for a, b in zip(reps, reps[1:]):
        if a < m and b < m:
            continue
        literals.append(Literal("<", names[a], names[b]))
    return conj(*literals)
