"""
原子 Kripke 模型

模型 = 状态集合 + 转移关系 + 满足关系，三者都是同一支撑上下文上的轨道有限对象。
提供模型 DSL 的构造与打印、状态解析、谓词纤维、不交并以及内置模型族。
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Sequence

from app.atoms import (
    AtomSort, Literal, SupportContext, TRUE, canonicalize, conj, format_constraint, make_atom,
    reindex, type_constraint, type_of,
)
from app.config import logger
from app.dsl import Declarations, parse_model_text
from app.orbits import (
    Element, Orbit, OrbitRelation, OrbitSet, PairOrbit, _left_map, image, orbit_line,
)
from app.utils import InputError, NotFoundError, ValidationError


@dataclass(frozen=True)
class KripkeModel:
    ctx: SupportContext
    states: OrbitSet
    trans: OrbitRelation
    sat: OrbitRelation
    name: str = "model"
    orbit_infinite: bool = False

    def __post_init__(self):
        for part in (self.states, self.trans, self.sat):
            if part.ctx != self.ctx:
                raise ValidationError("模型各部分的上下文不一致")
        known = self.states.as_frozenset()
        for p in self.trans:
            if p.left_orbit not in known or p.right_orbit not in known:
                raise ValidationError(f"转移 {p.left}->{p.right} 越出状态集合")
        for p in self.sat:
            if p.left_orbit not in known:
                raise ValidationError(f"标注 {p.left}:{p.right} 越出状态集合")

    @property
    def sort(self) -> AtomSort:
        return self.ctx.sort

    @cached_property
    def sat_index(self) -> frozenset:
        return frozenset(self.sat.pairs)

    @cached_property
    def trans_index(self) -> frozenset:
        return frozenset(self.trans.pairs)

    @property
    def max_state_arity(self) -> int:
        return max((o.arity for o in self.states), default=0)

    def element(self, element: Element) -> Orbit:
        """元素所在的状态轨道；不在状态集合中时报 NotFoundError"""
        arity = self.states.arities.get(element.tag)
        if arity is None or arity != len(element.args):
            raise NotFoundError(f"模型中没有状态 {element}")
        orbit = Orbit(element.tag, type_of(element.args, self.ctx))
        if orbit not in self.states:
            raise NotFoundError(f"模型中没有状态 {element}")
        return orbit

    def has_transition(self, x: Element, y: Element) -> bool:
        t = type_of(tuple(x.args) + tuple(y.args), self.ctx)
        return PairOrbit(x.tag, len(x.args), y.tag, len(y.args), t) in self.trans_index


# ---------------------------------------------------------------------------
# 构造与打印
# ---------------------------------------------------------------------------

def relation_from_terms(ctx: SupportContext, left: str, lterms: Sequence[str], right: str,
              rterms: Sequence[str], constraint) -> OrbitRelation:
    """项里出现的常量替换为新变量加等式约束"""
    extra = []
    counter = 0

    def lift(terms):
        nonlocal counter
        names = []
        for term in terms:
            if term in ctx.names:
                counter += 1
                fresh = f"_k{counter}"
                extra.append(Literal("=", fresh, term))
                names.append(fresh)
            else:
                names.append(term)
        return names

    lvars, rvars = lift(lterms), lift(rterms)
    return OrbitRelation.build(ctx, left, lvars, right, rvars, conj(constraint, *extra))


def context_from_decls(decls: Declarations) -> SupportContext:
    sort = decls.sort or AtomSort.EQUALITY
    names = [name for name, _ in decls.consts]
    witnesses = []
    for i, (_, value) in enumerate(decls.consts):
        witnesses.append(make_atom(sort, value) if value is not None else i + 1)
    return SupportContext(sort, tuple(names), tuple(witnesses))


def model_from_decls(decls: Declarations, name: str = "model") -> KripkeModel:
    ctx = context_from_decls(decls)
    orbits: list[Orbit] = []
    for tag, vars, c in decls.states:
        clash = set(vars) & set(ctx.names)
        if clash:
            raise InputError(f"状态 {tag} 的变量与常量同名：{sorted(clash)}")
        orbits.extend(OrbitSet.build(ctx, tag, vars, c).orbits)
    states = OrbitSet(ctx, tuple(orbits))
    sat_pairs: list[PairOrbit] = []
    for tag, terms, ptag, pterms, c in decls.labels:
        sat_pairs.extend(relation_from_terms(ctx, tag, terms, ptag, pterms, c).pairs)
    trans_pairs: list[PairOrbit] = []
    for tag, terms, tag2, terms2, c in decls.trans:
        trans_pairs.extend(relation_from_terms(ctx, tag, terms, tag2, terms2, c).pairs)
    model = KripkeModel(ctx, states, OrbitRelation(ctx, tuple(trans_pairs)),
                        OrbitRelation(ctx, tuple(sat_pairs)), name=name)
    logger.debug(f"模型 {name}：{len(states)} 个状态轨道，{len(model.trans)} 个转移轨道")
    return model


def parse_model(text: str, name: str = "model") -> KripkeModel:
    return model_from_decls(parse_model_text(text), name=name)


def context_lines(ctx: SupportContext) -> list[str]:
    lines = [f"atoms {ctx.sort.value}"]
    if ctx.size:
        sep = " < " if ctx.sort is AtomSort.ORDERED else ", "
        lines.append("const " + sep.join(f"{n} = {w}" for n, w in zip(ctx.names, ctx.witnesses)))
    return lines


def pair_line(keyword: str, arrow: str, ctx: SupportContext, p: PairOrbit) -> str:
    left = [f"_x{i + 1}" for i in range(p.left_arity)]
    right = [f"_y{i + 1}" for i in range(p.right_arity)]
    c = type_constraint(p.type, left + right, ctx)
    where = "" if c == TRUE else f" where {format_constraint(c)}"
    return f"{keyword} {p.left}({', '.join(left)}) {arrow} {p.right}({', '.join(right)}){where}"


def print_model(m: KripkeModel) -> str:
    lines = context_lines(m.ctx)
    for o in m.states:
        lines.append("state " + orbit_line(m.ctx, o, prefix="_x").replace(" where true", ""))
    for p in m.sat:
        lines.append(pair_line("label", ":", m.ctx, p))
    for p in m.trans:
        lines.append(pair_line("trans", "->", m.ctx, p))
    return "\n".join(lines) + "\n"


_STATE_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


def parse_state(text: str, sort: AtomSort) -> Element:
    """解析 "Leaf(3)"、"P()" 或 "P" 形式的具体状态"""
    match = _STATE_RE.match(text)
    if not match:
        raise InputError(f"无法解析状态：{text!r}")
    tag, body = match.group(1), match.group(2)
    args = tuple(make_atom(sort, a.strip()) for a in body.split(",")) if body and body.strip() else ()
    return Element(tag, args)


# ---------------------------------------------------------------------------
# 谓词
# ---------------------------------------------------------------------------

def pred_of(m: KripkeModel, x: OrbitSet) -> OrbitRelation:
    """满足关系在状态子集 x 上的限制"""
    return m.sat.restrict_left(x)


def successors(m: KripkeModel, x: OrbitSet) -> OrbitSet:
    return image(m.trans, x)


def fiber(r: OrbitRelation, element: Element) -> OrbitSet:
    """
    { y | (element, y) ∈ r }，表示为把 element 的原子并入上下文后的轨道有限集合
    """
    ctx = r.ctx
    args = tuple(element.args)
    ctx2 = ctx.with_atoms(args)
    tx = type_of(args, ctx)
    m = ctx.size
    n = len(args)
    position = {}
    for j, atom in enumerate(args):
        position.setdefault(atom, j)
    found = []
    for p in r.pairs:
        if p.left != element.tag or p.left_arity != n:
            continue
        if reindex(p.type, _left_map(m, n)) != tx:
            continue
        const_values = []
        for name, atom in zip(ctx2.names, ctx2.witnesses):
            if name in ctx.names:
                const_values.append(p.type.ranks[ctx.index(name)])
            else:
                const_values.append(p.type.ranks[m + position[atom]])
        right_values = p.type.ranks[m + n:]
        found.append(Orbit(p.right, canonicalize(ctx.sort, ctx2.size, tuple(const_values) + tuple(right_values))))
    return OrbitSet(ctx2, tuple(found))


def pred_set(m: KripkeModel, element: Element) -> OrbitSet:
    """pred(x)：在 x 上成立的全部基本谓词"""
    m.element(element)
    return fiber(m.sat, element)


def disjoint_union(m1: KripkeModel, m2: KripkeModel, left: str = "L", right: str = "R") -> KripkeModel:
    """两个同上下文模型的不交并；状态标签加前缀，谓词标签不变"""
    if m1.ctx != m2.ctx:
        raise InputError("不交并要求两个模型的上下文相同")

    def states(m, prefix):
        return [o._replace(tag=f"{prefix}_{o.tag}") for o in m.states]

    def trans(m, prefix):
        return [p._replace(left=f"{prefix}_{p.left}", right=f"{prefix}_{p.right}") for p in m.trans]

    def sat(m, prefix):
        return [p._replace(left=f"{prefix}_{p.left}") for p in m.sat]

    ctx = m1.ctx
    return KripkeModel(
        ctx,
        OrbitSet(ctx, tuple(states(m1, left) + states(m2, right))),
        OrbitRelation(ctx, tuple(trans(m1, left) + trans(m2, right))),
        OrbitRelation(ctx, tuple(sat(m1, left) + sat(m2, right))),
        name=f"{m1.name}+{m2.name}",
    )


def restrict_states(m: KripkeModel, keep: OrbitSet) -> KripkeModel:
    """子模型：只保留 keep 中的状态轨道"""
    known = keep.as_frozenset()
    trans = tuple(p for p in m.trans if p.left_orbit in known and p.right_orbit in known)
    sat = tuple(p for p in m.sat if p.left_orbit in known)
    return replace(m, states=keep, trans=OrbitRelation(m.ctx, trans), sat=OrbitRelation(m.ctx, sat))


# ---------------------------------------------------------------------------
# 内置模型
# ---------------------------------------------------------------------------

def _consts(names: Sequence[str], ordered: bool, start: int = 1) -> str:
    if not names:
        return ""
    sep = " < " if ordered else ", "
    return "const " + sep.join(f"{n} = {start + i}" for i, n in enumerate(names)) + "\n"


def _any_of(var: str, names: Sequence[str]) -> str:
    return " or ".join(f"{var} = {n}" for n in names) if names else "false"


def _none_of(var: str, names: Sequence[str]) -> str:
    return " and ".join(f"{var} != {n}" for n in names) if names else "true"


def _star() -> str:
    return """
atoms equality
state Star()
state Leaf(a)
trans Star() -> Leaf(a)
label Leaf(a) : p(a)
"""


def _increasing() -> str:
    return """
atoms ordered
state S(a)
trans S(a) -> S(b) where a < b
label S(a) : p(a)
"""


def _infsucc(k: int) -> str:
    if k < 1:
        raise InputError("infsucc 需要 k >= 1")
    s = [f"s{i + 1}" for i in range(2 * k)]
    return (
        "atoms equality\n" + _consts(s, False)
        + "state P()\nstate Q()\nstate R(a)\n"
        + f"trans P() -> R(a) where {_none_of('a', s)}\n"
        + f"trans Q() -> R(a) where {_any_of('a', s)}\n"
        + "label R(a) : p(a)\n"
    )


def _chain(n: int, k: int) -> str:
    if n <= 2 ** k:
        raise InputError(f"chain 需要 n > 2^k（n={n}, k={k}）")
    a = [f"a{i}" for i in range(n + 1)]
    b = [f"b{i}" for i in range(1, n)]
    lines = ["atoms equality", _consts(a + b, False).strip()]

    def label(tag, const):
        lines.append(f"label {tag}() : p({const})")

    for i in range(1, 2 * n + 1):
        lines += [f"state P_{i}()", f"state Q_{i}()"]
        const = f"a{i // 2 - 1}" if i % 2 == 0 else f"a{(i + 1) // 2}"
        label(f"P_{i}", const)
        label(f"Q_{i}", const)
    for i in range(1, n):
        lines += [f"state R_{i}()", f"state S_{i}()"]
        label(f"R_{i}", f"b{i}")
        label(f"S_{i}", f"b{i}")
    lines += ["state Top()", "state Bot()"]
    label("Top", f"a{n}")
    for i in range(1, 2 * n):
        lines += [f"trans P_{i}() -> P_{i + 1}()", f"trans Q_{i}() -> Q_{i + 1}()"]
    lines += [f"trans P_{2 * n}() -> Top()", f"trans Q_{2 * n}() -> Bot()"]
    for i in range(1, n):
        lines += [f"trans P_{2 * i + 1}() -> R_{i}()", f"trans Q_{2 * i + 1}() -> S_{i}()"]
    for i in range(1, n - 1):
        lines += [f"trans R_{i}() -> Q_{2 * i + 3}()", f"trans S_{i}() -> P_{2 * i + 3}()"]
    lines += [f"trans R_{n - 1}() -> Bot()", f"trans S_{n - 1}() -> Top()", "trans Top() -> Top()"]
    return "\n".join(lines) + "\n"


def _evensucc(k: int) -> str:
    n = 2 ** (k + 1)
    s = [f"s{i + 1}" for i in range(n)]
    t = [f"t{i + 1}" for i in range(2 * n + 1)]
    return (
        "atoms ordered\n" + _consts(s + t, True)
        + "state P()\nstate Q()\nstate R(a)\n"
        + f"trans P() -> R(a) where {_any_of('a', s)}\n"
        + f"trans Q() -> R(a) where {_any_of('a', t)}\n"
        + "label R(a) : p(a)\n"
    )


def _fan(n: int) -> str:
    labels = [f"l{i + 1}" for i in range(n)]
    text = "atoms ordered\n" + _consts(labels, True) + "state Root()\n"
    if labels:
        text += (f"state Leaf(a) where {_any_of('a', labels)}\n"
                 f"trans Root() -> Leaf(a) where {_any_of('a', labels)}\n"
                 "label Leaf(a) : p(a)\n")
    return text


def _interval_fan() -> str:
    return """
atoms ordered
const l1 = 1 < l2 = 2 < l3 = 3
state Fin()
state Inf()
state Leaf(a)
trans Fin() -> Leaf(a) where a = l1 or a = l3
trans Inf() -> Leaf(a) where l1 < a and a < l2
label Leaf(a) : p(a)
"""


def _freshpath(n: int, k: int = 1, variant: str = "K") -> str:
    if n <= k:
        raise InputError(f"freshpath 需要 n > k（n={n}, k={k}）")
    if variant not in ("K", "check"):
        raise InputError(f"freshpath 变体只能是 K 或 check：{variant}")
    names = []
    for i in range(1, n + 1):
        names += [f"a{i}", f"b{i}"]
    lines = ["atoms ordered", _consts(names, True).strip()]
    for i in range(1, n + 1):
        lines += [f"state P_{i}()", f"label P_{i}() : p(a{i})"]
        if i < n:
            lines.append(f"trans P_{i}() -> P_{i + 1}()")
    first = 0 if variant == "K" else 1
    for i in range(first, n + 1):
        for j in range(1, n + 1):
            tag = f"Q_{i}_{j}"
            lines += [f"state {tag}()", f"label {tag}() : p({'a' if i == j else 'b'}{j})"]
            if j < n:
                lines.append(f"trans {tag}() -> Q_{i}_{j + 1}()")
        lines += [f"trans P_{n}() -> Q_{i}_1()", f"trans Q_{i}_{n}() -> R(c)"]
    lines += ["state R(c)", "label R(c) : p(c)", "trans R(c) -> R(d)"]
    return "\n".join(lines) + "\n"


def _loop() -> str:
    return "atoms equality\nstate Loop()\ntrans Loop() -> Loop()\n"


def _cofinite(variant: str = "found") -> str:
    if variant == "found":
        return """
atoms equality
state Start()
state Co()
state Rest()
trans Start() -> Co()
trans Co() -> Rest()
trans Rest() -> Rest()
label Co() : p(a)
"""
    if variant == "excluded":
        return """
atoms equality
state Start()
state Co1()
state Co2()
trans Start() -> Co1()
trans Co1() -> Co2()
trans Co2() -> Co1()
label Co1() : p(a)
label Co2() : p(a)
"""
    raise InputError(f"cofinite 变体只能是 found 或 excluded：{variant}")


def _ctl_tm(machine: str = "write-one") -> str:
    from app.reductions import ctl_tm_source

    return ctl_tm_source(machine)


def _tm_run(machine: str = "write-one", steps: int = 16) -> "KripkeModel":
    from app.reductions import fixture_machine, run_to_lasso

    return run_to_lasso(fixture_machine(machine), steps).model


BUILTIN_MODELS = {
    "star": _star,
    "increasing": _increasing,
    "infsucc": _infsucc,
    "chain": _chain,
    "evensucc": _evensucc,
    "fan": _fan,
    "interval-fan": _interval_fan,
    "freshpath": _freshpath,
    "loop": _loop,
    "cofinite": _cofinite,
    "ctl-tm": _ctl_tm,
    "tm-run": _tm_run,
}

_SPEC_RE = re.compile(r"^\s*([A-Za-z][A-Za-z0-9_'-]*)\s*(?:\((.*)\))?\s*$")


def parse_builtin_spec(spec: str) -> tuple[str, tuple]:
    """ "freshpath(3,2,check)" -> ("freshpath", (3, 2, "check")) """
    match = _SPEC_RE.match(spec)
    if not match:
        raise InputError(f"无法解析内置名称：{spec!r}")
    params = []
    body = match.group(2)
    if body and body.strip():
        for raw in body.split(","):
            raw = raw.strip()
            params.append(int(raw) if raw.lstrip("-").isdigit() else raw)
    return match.group(1), tuple(params)


def builtin(name: str, *params) -> KripkeModel:
    if name not in BUILTIN_MODELS:
        raise NotFoundError(f"未知内置模型：{name}")
    try:
        source = BUILTIN_MODELS[name](*params)
    except TypeError as e:
        raise InputError(f"内置模型 {name} 的参数无效：{e}")
    label = f"{name}({', '.join(str(p) for p in params)})" if params else name
    if isinstance(source, KripkeModel):
        return replace(source, name=label)
    return parse_model(source, name=label)


def load_model(ref: str) -> KripkeModel:
    """ "builtin:name(params)" 或模型文件路径 """
    if ref.startswith("builtin:"):
        name, params = parse_builtin_spec(ref[len("builtin:"):])
        return builtin(name, *params)
    path = Path(ref)
    if not path.is_file():
        raise NotFoundError(f"模型文件不存在：{ref}")
    return parse_model(path.read_text(encoding="utf-8"), name=path.stem)
