import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lofu.algebra import parse_group_spec
from lofu.nerve import (
    Cochain,
    CoverMorphism,
    CoverSystem,
    EnumerationOverflow,
    MorphismError,
    NotACocycle,
    build_nerve,
    cech_delta,
    class_equal,
    coboundary_witness,
    cohomology,
    combine,
    pullback,
)
from lofu.spaces import BaseSpace, StarCover, fixture, load_complex

from conftest import Z, Z2, Z6, circle_generator
from oracles import canonical, cohomology_summands

GROUPS = [Z, Z2, Z6]


class Singleton(CoverSystem):
    def __init__(self):
        super().__init__(["*"])

    def witness(self, tup):
        return "*"


class Generic(CoverSystem):
    """Star-cover overlap test without the fast enumeration."""

    def __init__(self, complex):
        super().__init__(range(complex.vertex_count))
        self.complex = complex

    def witness(self, tup):
        return tuple(sorted(set(tup))) if self.complex.spans(tup) else None


def test_singleton_cover():
    nerve = build_nerve(Singleton(), 2)
    for n in range(1, 5):
        assert nerve.tuples(n).tolist() == [[0] * n]


def test_star_nerve_sizes():
    circle = StarCover(fixture("circle")).nerve
    assert circle.size(2) == 9
    pairs = {tuple(t) for t in circle.tuples(2).tolist()}
    assert pairs == {(i, i) for i in range(3)} | {(i, j) for i in range(3) for j in range(3) if i != j}
    tri = StarCover(load_complex({"vertices": 3, "simplices": [[0, 1, 2]]})).nerve
    assert tri.size(3) == 27
    assert StarCover(fixture("interval")).nerve.size(3) == 8


@pytest.mark.parametrize("name", ["point", "interval", "circle", "sphere2", "torus9"])
def test_fast_enumeration_matches_generic(name):
    k = fixture(name)
    fast, slow = StarCover(k).nerve, Generic(k).nerve
    for n in range(1, 4):
        assert np.array_equal(fast.tuples(n), slow.tuples(n))


def test_nerve_is_sorted_and_closed_under_faces():
    nerve = StarCover(fixture("sphere2")).nerve
    for n in range(2, 4):
        t = nerve.tuples(n)
        assert np.array_equal(t[np.lexsort(t.T[::-1])], t)
        for j in range(1, n + 1):
            assert (nerve.face(n, j) >= 0).all()


def test_enumeration_cap():
    cover = StarCover(fixture("sphere2"), cap=100)
    with pytest.raises(EnumerationOverflow):
        cover.nerve.tuples(4)


def test_build_nerve_requires_depth():
    with pytest.raises(ValueError):
        build_nerve(Singleton(), 0)


def test_delta_signs_on_circle():
    nerve = StarCover(fixture("circle")).nerve
    f = Cochain.from_function(nerve, 0, Z, lambda t: [1, 0, 0][t[0]])
    df = cech_delta(f)
    # δf(a, b) = -f(b) + f(a)
    assert df.at((0, 1)).coords == (1,)
    assert df.at((1, 2)).coords == (0,)
    assert df.at((2, 0)).coords == (-1,)
    assert cech_delta(Cochain.zero(nerve, 0, Z)).is_zero()


@pytest.mark.parametrize("name", ["point", "interval", "circle", "sphere2"])
@pytest.mark.parametrize("group", GROUPS, ids=str)
def test_delta_squared_vanishes(name, group, rng):
    nerve = StarCover(fixture(name)).nerve
    for k in range(3):
        f = Cochain.random(nerve, k, group, rng)
        assert cech_delta(cech_delta(f)).is_zero()


def test_combine():
    nerve = StarCover(fixture("circle")).nerve
    f = Cochain.from_function(nerve, 1, Z, lambda t: 3)
    g = Cochain.from_function(nerve, 1, Z, lambda t: 5)
    assert combine([(f, 1), (f, -1)]).is_zero()
    assert combine([(f, 1), (g, 1)]).at((0, 1)).coords == (8,)
    h = Cochain.from_function(nerve, 1, Z2, lambda t: 1)
    assert combine([(h, 2)]).is_zero()
    with pytest.raises(ValueError):
        combine([(f, 1), (h, 1)])
    with pytest.raises(ValueError):
        combine([])


def test_cochain_records_roundtrip(rng):
    nerve = StarCover(fixture("circle")).nerve
    f = Cochain.random(nerve, 1, Z6, rng)
    back = Cochain.from_records(nerve, 1, Z6, f.to_records())
    assert back.equals(f)
    sparse = Cochain.from_records(nerve, 1, Z6, f.to_records(nonzero_only=True))
    assert sparse.equals(f)
    assert f.first_difference(f) is None
    assert f.nonzero_witness() is not None
    assert (f + f).first_difference(f) == f.nonzero_witness()


def test_pullback_identity_and_collapse(rng):
    cover = StarCover(fixture("circle"))
    ident = CoverMorphism(cover, cover, lambda key: key, name="id")
    f = Cochain.random(cover.nerve, 1, Z, rng)
    assert pullback(ident, f).equals(f)
    point = Singleton()
    collapse = CoverMorphism(cover, point, [0, 0, 0])
    c = Cochain.from_function(point.nerve, 0, Z, lambda t: 7)
    assert (pullback(collapse, c).values == 7).all()


def test_pullback_commutes_with_delta(rng):
    base = BaseSpace(fixture("circle"))
    pi = base.projection(2, 1)
    for k in range(2):
        f = Cochain.random(base.star.nerve, k, Z6, rng)
        assert cech_delta(pullback(pi, f)).equals(pullback(pi, cech_delta(f)))


def test_morphism_outside_target_nerve():
    circle = StarCover(fixture("circle"))
    two_points = StarCover(load_complex({"vertices": 2, "simplices": [[0], [1]]}))
    m = CoverMorphism(circle, two_points, [0, 1, 1])
    with pytest.raises(MorphismError):
        m.rows(2)


def test_epsilon_pullback_of_generator(circle2):
    space = circle2
    alpha = circle_generator(space)
    u2 = space.base.power(2)
    f = Cochain.from_function(u2.nerve, 1, Z, lambda t: int(t[0]) - 2 * int(t[1]))
    pulled = pullback(space.epsilon, f)
    paths = space.tubes.indices
    for t in space.tubes.nerve.tuples(2)[:10].tolist():
        expect = f.at(tuple(u2.id_of[(paths[i][0], paths[i][-1])] for i in t))
        assert pulled.at(tuple(t)) == expect
    assert alpha.degree == 1


# -- cohomology ---------------------------------------------------------------


CASES = [
    ("point", 0), ("interval", 0), ("interval", 1),
    ("circle", 0), ("circle", 1), ("circle", 2),
    ("sphere2", 0), ("sphere2", 1), ("sphere2", 2),
    ("torus9", 0), ("torus9", 1),
]


@pytest.mark.parametrize("name, k", CASES)
@pytest.mark.parametrize("modulus", [0, 2, 6])
def test_cohomology_matches_simplicial_oracle(name, k, modulus):
    complex = fixture(name)
    group = parse_group_spec("Z" if modulus == 0 else f"Z/{modulus}")
    res = cohomology(StarCover(complex).nerve, group, k)
    expect = canonical(cohomology_summands(complex, k, modulus))
    assert (res.group.rank, res.group.torsion) == expect
    for g in res.generators:
        assert cech_delta(g).is_zero()
        assert coboundary_witness(g) is None


def test_cohomology_known_groups():
    circle = StarCover(fixture("circle")).nerve
    assert str(cohomology(circle, Z, 1).group) == "Z"
    assert str(cohomology(StarCover(fixture("point")).nerve, Z, 0).group) == "Z"
    assert str(cohomology(StarCover(fixture("sphere2")).nerve, Z2, 2).group) == "Z/2"


def test_circle_generator_is_nontrivial_class():
    base = BaseSpace(fixture("circle"))
    alpha = circle_generator(base)
    assert cech_delta(alpha).is_zero()
    assert coboundary_witness(alpha) is None
    gen = cohomology(base.star.nerve, Z, 1).generators[0]
    assert class_equal(alpha, gen) is not None or class_equal(-alpha, gen) is not None


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(GROUPS), st.integers(0, 1))
def test_coboundary_witness_solves_random_coboundaries(seed, group, k):
    rng = np.random.default_rng(seed)
    nerve = StarCover(fixture("circle")).nerve
    g = Cochain.random(nerve, k, group, rng)
    f = cech_delta(g)
    beta = coboundary_witness(f)
    assert beta is not None
    assert cech_delta(beta).equals(f)


def test_coboundary_witness_rejects_non_cocycle():
    nerve = StarCover(fixture("circle")).nerve
    f = Cochain.from_function(nerve, 0, Z, lambda t: t[0])
    with pytest.raises(NotACocycle):
        coboundary_witness(f)
    assert coboundary_witness(Cochain.zero(nerve, 1, Z)) is not None
