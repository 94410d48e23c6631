import json

import numpy as np
import pytest

from lofu.nerve import Cochain, cech_delta, pullback
from lofu.spaces import (
    BaseSpace,
    ComplexError,
    NotPartialClosed,
    fixture,
    load_complex,
    load_complex_file,
    partial_contract,
    product_cover,
    resolve_complex,
    simplicial_partial,
)

from conftest import Z, Z2, Z6


def test_fixture_simplex_counts():
    assert fixture("interval").simplex_count() == 3
    assert fixture("sphere2").simplex_count() == 14
    assert fixture("circle").simplex_count() == 6
    assert fixture("torus9").simplex_count() == 9 + 27 + 18


def test_load_keeps_maximal_simplices_and_isolated_vertices():
    k = load_complex({"vertices": 4, "simplices": [[0, 1, 2], [1, 2], [2, 0]]})
    assert k.maximal == ((0, 1, 2), (3,))
    assert k.spans((2, 1)) and not k.spans((0, 3))
    assert k.adjacency[3] == [3]


@pytest.mark.parametrize("doc", [
    {"vertices": 0, "simplices": []},
    {"vertices": 2, "simplices": [[0, 2]]},
    {"vertices": 2, "simplices": [[1, 1]]},
    {"vertices": 2, "simplices": [[]]},
    {"simplices": [[0]]},
    {"vertices": "two", "simplices": [[0]]},
])
def test_load_rejects_malformed(doc):
    with pytest.raises(ComplexError):
        load_complex(doc)


def test_load_from_files(tmp_path):
    doc = {"vertices": 3, "simplices": [[0, 1], [1, 2], [2, 0]]}
    (tmp_path / "c.json").write_text(json.dumps(doc))
    (tmp_path / "c.yaml").write_text("vertices: 3\nsimplices: [[0, 1], [1, 2], [2, 0]]\n")
    a = load_complex_file(tmp_path / "c.json")
    b = load_complex_file(tmp_path / "c.yaml")
    assert a.maximal == b.maximal == fixture("circle").maximal
    assert resolve_complex(str(tmp_path / "c.json")).maximal == a.maximal
    with pytest.raises(ComplexError):
        resolve_complex(str(tmp_path / "missing.json"))
    with pytest.raises(ComplexError):
        fixture("klein")


def test_basepoint_must_be_vertex():
    with pytest.raises(ComplexError):
        BaseSpace(fixture("circle"), basepoint=3)


def test_product_cover_sizes():
    base = BaseSpace(fixture("circle"))
    u2, projections = product_cover(base, 2)
    assert len(u2) == 9
    assert u2.nerve.size(2) == 81
    assert len(projections) == 2
    assert product_cover(fixture("interval"), 1)[1] == []
    assert BaseSpace(fixture("interval")).power(3).nerve.size(1) == 8


def test_product_overlap_is_factorwise():
    base = BaseSpace(fixture("circle"))
    u2 = base.power(2)
    star = base.star
    for t in u2.nerve.tuples(2).tolist():
        a, b = (base.vertex_tuple(2, i) for i in t)
        assert star.witness((a[0], b[0])) is not None
        assert star.witness((a[1], b[1])) is not None
    assert len(u2.nerve.tuples(2)) == star.nerve.size(2) ** 2


def test_projection_and_inclusion_identities():
    base = BaseSpace(fixture("sphere2"), basepoint=2)
    for n in (1, 2):
        incl = base.inclusion(n)
        # π_1 ∘ i_n = id and π_j ∘ i_n = i_(n-1) ∘ π_(j-1) for j >= 2
        assert np.array_equal(base.projection(n + 1, 1).compose(incl).index_map, np.arange(len(base.power(n))))
    incl = base.inclusion(2)
    for j in (2, 3):
        lhs = base.projection(3, j).compose(incl)
        rhs = base.inclusion(1).compose(base.projection(2, j - 1))
        assert np.array_equal(lhs.index_map, rhs.index_map)
    with pytest.raises(ValueError):
        base.projection(2, 3)
    with pytest.raises(ValueError):
        base.power(0)


@pytest.mark.parametrize("name", ["interval", "circle", "sphere2"])
@pytest.mark.parametrize("group", [Z, Z2, Z6], ids=str)
def test_partial_squared_vanishes(name, group, rng):
    base = BaseSpace(fixture(name))
    for n in (1, 2):
        f = Cochain.random(base.power(n).nerve, 1, group, rng)
        assert simplicial_partial(base, simplicial_partial(base, f)).is_zero()


def test_partial_commutes_with_delta(rng):
    base = BaseSpace(fixture("circle"))
    f = Cochain.random(base.power(2).nerve, 1, Z6, rng)
    assert cech_delta(simplicial_partial(base, f)).equals(simplicial_partial(base, cech_delta(f)))


def test_partial_of_point_function():
    base = BaseSpace(fixture("circle"))
    f = Cochain.from_function(base.star.nerve, 0, Z, lambda t: [5, 2, 0][t[0]])
    df = simplicial_partial(base, f)
    # ∂f(a, b) = f(a) - f(b)
    for t in base.power(2).nerve.tuples(1).tolist():
        a, b = base.vertex_tuple(2, t[0])
        assert df.at(tuple(t)).coords == ([5, 2, 0][a] - [5, 2, 0][b],)


@pytest.mark.parametrize("basepoint", [0, 1])
def test_partial_contract_inverts_closed_cochains(basepoint, rng):
    base = BaseSpace(fixture("sphere2"))
    for n in (2, 3):
        g0 = Cochain.random(base.power(n - 1).nerve, 1, Z6, rng)
        f = simplicial_partial(base, g0)
        g = partial_contract(base, f, basepoint)
        assert simplicial_partial(base, g).equals(f)


def test_partial_contract_rejects_non_closed(rng):
    base = BaseSpace(fixture("circle"))
    f = Cochain.from_function(base.power(2).nerve, 0, Z, lambda t: 1)
    with pytest.raises(NotPartialClosed):
        partial_contract(base, f)
    with pytest.raises(ValueError):
        partial_contract(base, Cochain.zero(base.star.nerve, 0, Z))


def test_projection_pullback_of_star_cochain():
    base = BaseSpace(fixture("circle"))
    f = Cochain.from_function(base.star.nerve, 0, Z, lambda t: t[0] + 1)
    g = pullback(base.projection(2, 1), f)
    for t in base.power(2).nerve.tuples(1).tolist():
        assert g.at(tuple(t)).coords == (base.vertex_tuple(2, t[0])[1] + 1,)
