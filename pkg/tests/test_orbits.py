import itertools
import random

import pytest

from app.atoms import TRUE, AtomSort, Literal, SupportContext, conj, type_of
from app.orbits import (
    Element, Orbit, OrbitRelation, OrbitSet, complement, concretize, count_supported_subsets,
    equals, image, is_supported_by, least_support, member, orbits_under, preimage, subset,
)
from app.utils import InputError

EQ = SupportContext(AtomSort.EQUALITY, ("s1", "s2"), (1, 2))
ORD = SupportContext(AtomSort.ORDERED, ("l", "u"), (1, 3))


def avoid_both() -> OrbitSet:
    return OrbitSet.build(EQ, "A", ["x"], conj(Literal("!=", "x", "s1"), Literal("!=", "x", "s2")))


def random_subset(rng: random.Random, universe: OrbitSet) -> OrbitSet:
    return OrbitSet.of(universe.ctx, (o for o in universe.orbits if rng.random() < 0.5))


def all_subsets(universe: OrbitSet) -> list[OrbitSet]:
    return [OrbitSet.of(universe.ctx, chosen)
            for r in range(len(universe) + 1) for chosen in itertools.combinations(universe.orbits, r)]


class TestOrbitSetAlgebra:
    """集合运算与成员判定"""

    def test_01_full_set_orbits(self):
        """带两个常量时 A(x) 有三个轨道"""
        assert len(OrbitSet.full(EQ, "A", 1)) == 3

    def test_02_complement(self):
        full = OrbitSet.full(EQ, "A", 1)
        rest = complement(avoid_both(), full)
        assert len(rest) == 2
        assert equals(rest.union(avoid_both()), full)
        assert not rest.intersect(avoid_both()).orbits

    def test_03_membership(self):
        x = avoid_both()
        assert member(Element("A", (7,)), x)
        assert not member(Element("A", (1,)), x)

    def test_04_unknown_tag_is_not_member(self):
        assert not member(Element("B", (7,)), avoid_both())

    def test_05_arity_mismatch_rejected(self):
        with pytest.raises(InputError):
            member(Element("A", (7, 8)), avoid_both())

    def test_06_context_mismatch_rejected(self):
        other = OrbitSet.full(SupportContext.empty(AtomSort.EQUALITY), "A", 1)
        with pytest.raises(InputError):
            avoid_both().union(other)

    def test_07_product_pairs_orbits(self):
        """空上下文上 𝔸 × 𝔸 是两个轨道"""
        ctx = SupportContext.empty(AtomSort.EQUALITY)
        a = OrbitSet.full(ctx, "A", 1)
        assert len(a.product(a)) == 2

    def test_08_subset(self):
        assert subset(avoid_both(), OrbitSet.full(EQ, "A", 1))
        assert not subset(OrbitSet.full(EQ, "A", 1), avoid_both())

    def test_09_concretize(self):
        """原子池 {1, 2, 3} 上只有 A(3) 避开两个常量"""
        assert concretize(avoid_both(), [1, 2, 3]) == [Element("A", (3,))]


class TestBooleanLaws:
    """随机轨道集合上的布尔代数律"""

    UNIVERSES = [
        OrbitSet.full(EQ, "A", 2).union(OrbitSet.full(EQ, "B", 1)),
        OrbitSet.full(ORD, "A", 2),
    ]

    @pytest.mark.parametrize("seed", range(10))
    @pytest.mark.parametrize("universe", UNIVERSES, ids=["equality", "ordered"])
    def test_01_associativity(self, universe, seed):
        rng = random.Random(seed)
        x, y, z = (random_subset(rng, universe) for _ in range(3))
        assert equals(x.union(y).union(z), x.union(y.union(z)))
        assert equals(x.intersect(y).intersect(z), x.intersect(y.intersect(z)))

    @pytest.mark.parametrize("seed", range(10))
    @pytest.mark.parametrize("universe", UNIVERSES, ids=["equality", "ordered"])
    def test_02_distributivity(self, universe, seed):
        rng = random.Random(seed)
        x, y, z = (random_subset(rng, universe) for _ in range(3))
        assert equals(x.intersect(y.union(z)), x.intersect(y).union(x.intersect(z)))
        assert equals(x.union(y.intersect(z)), x.union(y).intersect(x.union(z)))

    @pytest.mark.parametrize("seed", range(10))
    @pytest.mark.parametrize("universe", UNIVERSES, ids=["equality", "ordered"])
    def test_03_de_morgan(self, universe, seed):
        rng = random.Random(seed)
        x, y = random_subset(rng, universe), random_subset(rng, universe)
        assert equals(complement(x.union(y), universe),
                      complement(x, universe).intersect(complement(y, universe)))
        assert equals(complement(x.intersect(y), universe),
                      complement(x, universe).union(complement(y, universe)))
        assert equals(complement(complement(x, universe), universe), x)


class TestSupport:
    """最小支撑与轨道划分"""

    def test_01_cofinite_set_support(self):
        assert least_support(avoid_both()) == ("s1", "s2")

    def test_02_interval_support(self):
        interval = OrbitSet.build(ORD, "I", ["x"], conj(Literal("<", "l", "x"), Literal("<", "x", "u")))
        assert least_support(interval) == ("l", "u")

    def test_03_half_line_support(self):
        above = OrbitSet.build(ORD, "I", ["x"], Literal(">", "x", "u"))
        assert least_support(above) == ("u",)

    def test_04_equivariant_set(self):
        full = OrbitSet.full(EQ, "A", 2)
        assert least_support(full) == ()
        assert is_supported_by(full, [])

    def test_05_orbits_under_subcontext(self):
        """在 {s1} 下 A(x) 分成 x = s1 与 x ≠ s1"""
        cells = orbits_under(OrbitSet.full(EQ, "A", 1), ["s1"])
        assert len(cells) == 2
        assert count_supported_subsets(OrbitSet.full(EQ, "A", 1), ["s1"]) == 4

    def test_06_orbits_under_requires_support(self):
        with pytest.raises(InputError):
            orbits_under(avoid_both(), ["s1"])

    @pytest.mark.parametrize("ctx", [EQ, ORD], ids=["equality", "ordered"])
    def test_07_supported_exactly_above_least_support(self, ctx):
        """对上下文的每个子集 T：X 被 T 支撑 当且仅当 T ⊇ least_support(X)"""
        names = ctx.names
        choices = [c for r in range(len(names) + 1) for c in itertools.combinations(names, r)]
        for x in all_subsets(OrbitSet.full(ctx, "A", 1)):
            least = set(least_support(x))
            for t in choices:
                assert is_supported_by(x, t) == (set(t) >= least)

    @pytest.mark.parametrize("seed", range(5))
    def test_08_supported_exactly_above_least_support_pairs(self, seed):
        rng = random.Random(seed)
        x = random_subset(rng, OrbitSet.full(EQ, "A", 2))
        least = set(least_support(x))
        for t in [(), ("s1",), ("s2",), ("s1", "s2")]:
            assert is_supported_by(x, t) == (set(t) >= least)


class TestRelations:
    """轨道有限关系"""

    def test_01_identity_and_converse(self):
        x = OrbitSet.full(EQ, "A", 1)
        ident = OrbitRelation.identity(x)
        assert len(ident) == 3
        assert ident.converse().pairs == ident.pairs

    def test_02_image_and_preimage(self):
        ctx = SupportContext.empty(AtomSort.ORDERED)
        r = OrbitRelation.build(ctx, "S", ["a"], "S", ["b"], Literal("<", "a", "b"))
        s = OrbitSet.full(ctx, "S", 1)
        assert image(r, s).orbits == s.orbits
        assert preimage(r, s).orbits == s.orbits
        assert r.domain().orbits == s.orbits

    def test_03_relation_build_shared_variable(self):
        """左右共享变量名即为相等约束"""
        ctx = SupportContext.empty(AtomSort.EQUALITY)
        r = OrbitRelation.build(ctx, "A", ["a"], "B", ["a"], TRUE)
        assert len(r) == 1
        (p,) = r.pairs
        assert p.type == type_of([4, 4], ctx)

    def test_04_dump_is_stable(self):
        x = avoid_both()
        assert x.dump() == avoid_both().dump()
        assert x.dump()[0].startswith("A(x1) where ")

    def test_05_orbit_arity(self):
        assert Orbit("A", type_of([1, 2], SupportContext.empty(AtomSort.EQUALITY))).arity == 2
