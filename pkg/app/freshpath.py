"""
#Path：是否存在一条无穷路径，其上每个原子至多被标记一次

基本谓词是一元标签 p(a)。对 pred(x) 有限的状态，在 K̂ 上把 x 支撑中已经出现过的原子
记为禁止集合 S；⟨x, ∅⟩ 满足 νX.◇X 当且仅当 x 满足 #Path。
支撑取 x 的参数并上下文常量；S 与谓词都以支撑键记录（c{i} 为第 i 个常量，v{j} 为第 j 个参数）。
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

from app.atoms import AtomSort, CompleteType, type_of
from app.checker import holds
from app.config import BOUNDED_ORACLE_STEPS, ORACLE_EXTRA, logger
from app.formulas import Diamond, Var, nu
from app.kripke import KripkeModel, restrict_states
from app.orbits import Element, Orbit, OrbitRelation, OrbitSet, PairOrbit, concretize
from app.utils import UnsupportedModelError

INFINITE_PATH = nu("X", Diamond(Var("X")))


class Prefilter(str, Enum):
    FOUND_PATH = "found-path"
    EXCLUDED = "excluded"
    NOT_APPLICABLE = "not-applicable"


class StateInfo(NamedTuple):
    keys: dict          # 支撑键 -> 类型中的下标
    pred: frozenset     # 谓词原子对应的支撑键
    cofinite: bool


def support_keys(t: CompleteType) -> dict[str, int]:
    """每个不同的支撑原子取一个键；与常量相等的参数用常量的键"""
    c = t.consts
    keys = {f"c{i}": i for i in range(c)}
    seen = {t.ranks[i] for i in range(c)}
    for j in range(t.arity):
        r = t.ranks[c + j]
        if r not in seen:
            seen.add(r)
            keys[f"v{j}"] = c + j
    return keys


def _key_of(t: CompleteType, keys: dict, position: int) -> Optional[str]:
    for key, idx in keys.items():
        if t.ranks[idx] == t.ranks[position]:
            return key
    return None


def state_info(m: KripkeModel) -> dict[Orbit, StateInfo]:
    """每个状态轨道的支撑键、谓词键以及谓词是否无穷"""
    tags = {p.right for p in m.sat}
    if any(p.right_arity != 1 for p in m.sat) or len(tags) > 1:
        raise UnsupportedModelError("#Path 只支持单个一元谓词标签")
    labels: dict[Orbit, list[PairOrbit]] = {}
    for p in m.sat:
        labels.setdefault(p.left_orbit, []).append(p)
    info = {}
    for o in m.states:
        keys = support_keys(o.type)
        pred = set()
        infinite = False
        for p in labels.get(o, ()):
            key = _key_of(p.type, keys, m.ctx.size + o.arity)
            if key is None:
                infinite = True
            else:
                pred.add(key)
        if infinite and m.ctx.sort is AtomSort.ORDERED:
            raise UnsupportedModelError(f"状态 {o.tag} 的谓词集合是无穷区间，超出 #Path 判定的范围")
        info[o] = StateInfo(keys, frozenset(pred), infinite)
    return info


# ---------------------------------------------------------------------------
# 余有限预过滤
# ---------------------------------------------------------------------------

class _CofiniteSearch:
    """
    经过恰好一个谓词余有限状态 z 的新鲜路径（两个这样的状态谓词必然相交）。
    pred(z) 之外只剩 z 支撑中的有限个允许原子，路径上其他状态的谓词都得落在其中。

    前段节点 ⟨o, S, f⟩：S 为 o 支撑中已被标记原子的键，f 为已离开支撑的标记原子个数；
    到达 z 时它们全部要成为 z 的允许原子。
    后段节点 ⟨o, R, g⟩：R 为 o 支撑中尚未用过的允许原子，g 为离开支撑的此类原子个数。
    后段图有限，存在可达环即存在无穷路径。
    """

    def __init__(self, m: KripkeModel, info: dict[Orbit, StateInfo]):
        self.info = info
        self.c = m.ctx.size
        self.out: dict[Orbit, list[PairOrbit]] = {}
        for p in m.trans:
            self.out.setdefault(p.left_orbit, []).append(p)
        # 前段标记的原子总数不能超过任何 z 的允许原子数
        self.limit = max((len(i.keys) - len(i.pred) for i in info.values() if i.cofinite), default=0)

    def _ranks(self, p: PairOrbit) -> tuple[dict, dict]:
        x, y = self.info[p.left_orbit], self.info[p.right_orbit]
        left = {key: p.type.ranks[idx] for key, idx in x.keys.items()}
        right = {key: p.type.ranks[idx if idx < self.c else idx + p.left_arity] for key, idx in y.keys.items()}
        return left, right

    def prefix_steps(self, o: Orbit, marked: frozenset, forgotten: int):
        x = self.info[o]
        for p in self.out.get(o, ()):
            y = self.info[p.right_orbit]
            left, right = self._ranks(p)
            ranks = {left[key] for key in marked | x.pred}
            required = frozenset(key for key, r in right.items() if r in ranks)
            if required & y.pred:
                continue
            fresh = frozenset(key for key, r in right.items() if r not in left.values())
            lost = len(ranks - set(right.values()))
            if y.cofinite:
                # 标记原子若不在 z 的支撑中就属于 pred(z)
                if lost:
                    continue
                for absorbed in _subsets(fresh - y.pred):
                    if len(absorbed) == forgotten:
                        yield p.right_orbit, frozenset(y.keys) - y.pred - required - absorbed, 0
                continue
            for absorbed in _subsets(fresh - y.pred):
                if len(absorbed) > forgotten:
                    continue
                t = required | absorbed
                f = forgotten - len(absorbed) + lost
                if len(t | y.pred) + f <= self.limit:
                    yield p.right_orbit, t, f

    def suffix_steps(self, o: Orbit, free: frozenset, pool: int):
        for p in self.out.get(o, ()):
            y = self.info[p.right_orbit]
            if y.cofinite:
                continue
            left, right = self._ranks(p)
            free_ranks = {left[key] for key in free}
            fresh = frozenset(key for key, r in right.items() if r not in left.values())
            kept = frozenset(key for key, r in right.items() if r in free_ranks)
            if not (y.pred - fresh) <= kept:
                continue
            lost = len(free_ranks - set(right.values()))
            for absorbed in _subsets(fresh):
                if len(absorbed) <= pool and (y.pred & fresh) <= absorbed:
                    yield p.right_orbit, (kept | absorbed) - y.pred, pool - len(absorbed) + lost

    def hubs(self, start: Orbit) -> set:
        """x 出发、途经有限谓词状态到达 z 时的后段起点"""
        i = self.info[start]
        if i.cofinite:
            return {(start, frozenset(i.keys) - i.pred, 0)}
        found = set()
        if len(i.pred) > self.limit:
            return found
        first = (start, frozenset(), 0)
        seen = {first}
        queue = deque(seen)
        while queue:
            for node in self.prefix_steps(*queue.popleft()):
                if self.info[node[0]].cofinite:
                    found.add(node)
                elif node not in seen:
                    seen.add(node)
                    queue.append(node)
        return found

    def endless(self, starts: set) -> bool:
        graph: dict[tuple, set] = {}
        queue = deque(starts)
        while queue:
            node = queue.popleft()
            if node not in graph:
                graph[node] = set(self.suffix_steps(*node))
                queue.extend(n for n in graph[node] if n not in graph)
        alive = set(graph)
        while True:
            dead = {node for node in alive if not graph[node] & alive}
            if not dead:
                return bool(alive)
            alive -= dead


def cofinite_prefilter(m: KripkeModel, x: Element) -> Prefilter:
    """经过谓词余有限状态的新鲜路径是否存在"""
    orbit = m.element(x)
    info = state_info(m)
    if not any(i.cofinite for i in info.values()):
        return Prefilter.NOT_APPLICABLE
    search = _CofiniteSearch(m, info)
    found = search.endless(search.hubs(orbit))
    verdict = Prefilter.FOUND_PATH if found else Prefilter.EXCLUDED
    logger.debug(f"余有限预过滤 {x}：{verdict.value}")
    return verdict


# ---------------------------------------------------------------------------
# K̂
# ---------------------------------------------------------------------------

def khat_tag(tag: str, forbidden) -> str:
    return f"{tag}__S_{'_'.join(sorted(forbidden))}"


def _subsets(keys) -> list[frozenset]:
    items = sorted(keys)
    return [frozenset(c) for r in range(len(items) + 1) for c in itertools.combinations(items, r)]


class _KHatBuilder:
    def __init__(self, m: KripkeModel, minimal: bool):
        self.m = m
        self.minimal = minimal
        self.info = state_info(m)
        bad = [o.tag for o, i in self.info.items() if i.cofinite]
        if bad:
            raise UnsupportedModelError(f"K̂ 要求谓词有限，先删除余有限状态：{sorted(set(bad))}")
        self.c = m.ctx.size
        self.out: dict[Orbit, list[PairOrbit]] = {}
        for p in m.trans:
            self.out.setdefault(p.left_orbit, []).append(p)

    def successors(self, o: Orbit, forbidden: frozenset) -> list[tuple[PairOrbit, Orbit, frozenset]]:
        """K̂ 中 ⟨o, S⟩ 的后继：(S ∪ pred(x)) ∩ supp(y) ⊆ T ⊆ supp(y) ∖ pred(y)"""
        found = []
        x = self.info[o]
        for p in self.out.get(o, ()):
            target = p.right_orbit
            y = self.info[target]
            e = p.type
            marked = {e.ranks[x.keys[key]] for key in forbidden | x.pred}
            shift = {key: (idx if idx < self.c else idx + p.left_arity) for key, idx in y.keys.items()}
            required = frozenset(key for key, idx in shift.items() if e.ranks[idx] in marked)
            if required & y.pred:
                continue
            if self.minimal:
                choices = [required]
            else:
                choices = [required | extra for extra in _subsets(set(y.keys) - y.pred - required)]
            for t in choices:
                edge = PairOrbit(khat_tag(o.tag, forbidden), p.left_arity,
                                 khat_tag(target.tag, t), p.right_arity, e)
                found.append((edge, target, t))
        return found

    def model(self, states: list[Orbit], edges: list[PairOrbit]) -> KripkeModel:
        ctx = self.m.ctx
        return KripkeModel(ctx, OrbitSet(ctx, tuple(states)), OrbitRelation(ctx, tuple(edges)),
                           OrbitRelation.empty(ctx), name=f"khat({self.m.name})")

    def full(self) -> KripkeModel:
        states, edges = [], []
        for o, i in self.info.items():
            for s in _subsets(set(i.keys) - i.pred):
                states.append(Orbit(khat_tag(o.tag, s), o.type))
                edges.extend(edge for edge, _, _ in self.successors(o, s))
        return self.model(states, edges)

    def reachable(self, start: Orbit) -> KripkeModel:
        seen = {(start, frozenset())}
        queue = deque(seen)
        states, edges = [], []
        while queue:
            o, s = queue.popleft()
            states.append(Orbit(khat_tag(o.tag, s), o.type))
            for edge, target, t in self.successors(o, s):
                edges.append(edge)
                if (target, t) not in seen:
                    seen.add((target, t))
                    queue.append((target, t))
        return self.model(states, edges)


def build_khat(m: KripkeModel) -> KripkeModel:
    """完整的 K̂（全部禁止集合与全部合法的 T）"""
    return _KHatBuilder(m, minimal=False).full()


def khat_orbit_bound(m: KripkeModel) -> int:
    """每个状态轨道至多 2^|supp| 个 K̂ 轨道"""
    return sum(2 ** len(i.keys) for i in state_info(m).values() if not i.cofinite)


def decide_freshpath(m: KripkeModel, x: Element) -> bool:
    orbit = m.element(x)
    verdict = cofinite_prefilter(m, x)
    if verdict is Prefilter.FOUND_PATH:
        return True
    if verdict is Prefilter.EXCLUDED:
        info = state_info(m)
        if info[orbit].cofinite:
            return False
        keep = OrbitSet(m.ctx, tuple(o for o, i in info.items() if not i.cofinite))
        m = restrict_states(m, keep)
    # 取最小的 T 只会让后续约束更少
    khat = _KHatBuilder(m, minimal=True).reachable(orbit)
    start = Element(khat_tag(x.tag, ()), x.args)
    result = holds(khat, start, INFINITE_PATH)
    logger.info(f"#Path 在 {x} 上：{result}（K̂ 可达部分 {len(khat.states)} 个轨道）")
    return result


# ---------------------------------------------------------------------------
# 有界搜索
# ---------------------------------------------------------------------------

class OracleVerdict(str, Enum):
    WITNESS = "witness"
    NONE_WITHIN = "none-within"


@dataclass(frozen=True)
class OracleResult:
    verdict: OracleVerdict
    path: tuple = ()

    @property
    def found(self) -> bool:
        return self.verdict is OracleVerdict.WITNESS


def _pool(m: KripkeModel, x: Element, extra: int) -> list:
    start = max(m.ctx.witnesses, default=0) + 1
    fresh = [start + i for i in range(extra)]
    return sorted(set(m.ctx.witnesses) | set(x.args) | set(fresh))


def bounded_oracle(m: KripkeModel, x: Element, steps: int = BOUNDED_ORACLE_STEPS,
                   extra: int = ORACLE_EXTRA, budget: int = 50000) -> OracleResult:
    """
    在有限原子池上深度优先搜索套索：前缀标记原子两两不同，环上状态不带谓词。
    路径至多经过一个谓词余有限的元素 z，此后的标记只能取 z 支撑中未被标记的原子。
    找到即是真证据；找不到不说明任何事
    """
    m.element(x)
    info = state_info(m)
    pool = _pool(m, x, extra)
    elements = concretize(m.states, pool)
    cofinite = {v for v in elements if info[m.element(v)].cofinite}
    trans = m.trans_index
    sat = m.sat_index
    tag = next(iter({p.right for p in m.sat}), None)

    def support(v: Element) -> set:
        return set(m.ctx.witnesses) | set(v.args)

    def pred(v: Element) -> frozenset:
        if tag is None:
            return frozenset()
        return frozenset(a for a in support(v)
                         if PairOrbit(v.tag, len(v.args), tag, 1, type_of(tuple(v.args) + (a,), m.ctx)) in sat)

    labels = {v: pred(v) for v in elements}
    allowed = {v: frozenset(support(v)) - labels[v] for v in cofinite}
    succ: dict[Element, list[Element]] = {}

    def successors(v: Element) -> list[Element]:
        if v not in succ:
            succ[v] = [w for w in elements
                       if PairOrbit(v.tag, len(v.args), w.tag, len(w.args),
                                    type_of(tuple(v.args) + tuple(w.args), m.ctx)) in trans]
        return succ[v]

    path = [x]
    expanded = 0

    def dfs(used: frozenset, limit: Optional[frozenset]) -> Optional[tuple]:
        nonlocal expanded
        expanded += 1
        if expanded > budget:
            return None
        for w in successors(path[-1]):
            if w in path:
                i = path.index(w)
                if all(u not in cofinite and not labels[u] for u in path[i:]):
                    return tuple(path) + (w,)
                continue
            if len(path) >= steps:
                continue
            if w in cofinite:
                if limit is not None or not used <= allowed[w]:
                    continue
                step = (used, allowed[w])
            else:
                if labels[w] & used or (limit is not None and not labels[w] <= limit):
                    continue
                step = (used | labels[w], limit)
            path.append(w)
            found = dfs(*step)
            if found:
                return found
            path.pop()
        return None

    if x in cofinite:
        lasso = dfs(frozenset(), allowed[x])
    else:
        lasso = dfs(labels[x], None)
    if lasso:
        logger.debug(f"有界搜索在 {x} 找到长度 {len(lasso)} 的套索")
        return OracleResult(OracleVerdict.WITNESS, lasso)
    return OracleResult(OracleVerdict.NONE_WITHIN)
