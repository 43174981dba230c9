import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emhyp.errors import DegenerateConfiguration, EmptySupport, NotFullDimensional
from emhyp.laurent import FactorList, LaurentPoly
from emhyp.polytope import (
    distance_d,
    is_full_dimensional,
    margin,
    newton_facets,
    pole_semigroup,
    step_distance,
)


def fl(*polys):
    return FactorList.make(list(polys))


def test_interval_facets():
    nd = newton_facets(fl(LaurentPoly.univariate({0: 1, 1: 1, 3: 1, 4: 1})))
    got = {(f.mu, tuple(f.nu), f.nu_sum) for f in nd.facets}
    assert got == {((-1,), (-4,), -4), ((1,), (0,), 0)}


def test_square_facets():
    f = LaurentPoly.make(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1})
    nd = newton_facets(fl(f))
    mus = {f.mu for f in nd.facets}
    assert mus == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    for fac in nd.facets:
        assert fac.nu_sum == sum(fac.nu)


def test_triangle_facets_and_offsets():
    # Newton polytope with vertices (0,0), (1,0), (1,2)
    f = LaurentPoly.make(2, {(0, 0): 1, (1, 0): 1, (1, 2): 1})
    nd = newton_facets(fl(f))
    got = {(fac.mu, fac.nu[0]) for fac in nd.facets}
    assert got == {((0, 1), 0), ((-1, 0), -1), ((2, -1), 0)}


def test_two_factor_offsets_split():
    f1 = LaurentPoly.univariate({0: 1, 2: 1})
    f2 = LaurentPoly.univariate({1: 1, 3: 1})
    nd = newton_facets(fl(f1, f2))
    by_mu = {fac.mu: fac for fac in nd.facets}
    assert by_mu[(1,)].nu == (0, 1)
    assert by_mu[(-1,)].nu == (-2, -3)
    assert by_mu[(1,)].nu_sum == 1
    assert by_mu[(-1,)].nu_sum == -5


def test_minkowski_degenerate_factor():
    # a segment factor times a triangle factor: the sum's facet in the
    # direction where the segment is flat must not be duplicated or lost
    seg = LaurentPoly.make(2, {(0, 0): 1, (1, 0): 1})
    tri = LaurentPoly.make(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1})
    nd = newton_facets(fl(seg, tri))
    mus = {fac.mu for fac in nd.facets}
    # the Minkowski sum has vertices (0,0), (2,0), (1,1), (0,1); the segment
    # alone would contribute a spurious (-1, 0) supporting direction
    assert mus == {(0, 1), (0, -1), (1, 0), (-1, -1)}


def test_margin_formula():
    f = LaurentPoly.univariate({0: 1, 1: 1})
    nd = newton_facets(fl(f))
    k = nd.facet_index((1,))
    assert margin(nd, k, [0.5], [1.0]) == pytest.approx(0.5)
    k2 = nd.facet_index((-1,))
    assert margin(nd, k2, [0.5], [1.0]) == pytest.approx(0.5)


def test_distance_and_step_distance():
    f = LaurentPoly.univariate({0: 1, 1: 1, 3: 1, 4: 1})
    nd = newton_facets(fl(f))
    k = nd.facet_index((1,))
    assert distance_d(nd, k, (3,)) == 3
    g_support = [(1,), (3,), (4,)]
    assert step_distance(nd, k, g_support) == 1
    with pytest.raises(EmptySupport):
        step_distance(nd, k, [])


def test_full_dimensionality():
    f = LaurentPoly.make(2, {(0, 0): 1, (1, 1): 1})  # a segment in the plane
    nd = newton_facets(fl(f))
    assert not is_full_dimensional(nd)
    g = LaurentPoly.make(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1})
    assert is_full_dimensional(newton_facets(fl(g)))


def test_pole_semigroup_gaps():
    # exponents {0,1,3,4}: distances from the upper facet generate {0,1,3,4,...}
    f = LaurentPoly.univariate({0: 1, 1: 1, 3: 1, 4: 1})
    nd = newton_facets(fl(f))
    k = nd.facet_index((1,))
    sg = pole_semigroup(nd, k, f.support(), 10)
    assert 0 in sg and 1 in sg
    assert 2 in sg  # 1 + 1
    assert sg == set(range(11))


def test_degenerate_3d_raises():
    f = LaurentPoly.make(3, {(0, 0, 0): 1, (1, 0, 0): 1, (0, 1, 0): 1})
    with pytest.raises(DegenerateConfiguration):
        newton_facets(fl(f))


@given(
    st.sets(st.integers(0, 8), min_size=2, max_size=6),
)
@settings(max_examples=80, deadline=None)
def test_univariate_facets_property(exps):
    f = LaurentPoly.univariate({e: 1 for e in exps})
    nd = newton_facets(fl(f))
    by_mu = {fac.mu: fac for fac in nd.facets}
    assert set(by_mu) == {(1,), (-1,)}
    assert by_mu[(1,)].nu == (min(exps),)
    assert by_mu[(-1,)].nu == (-max(exps),)


@given(
    st.sets(
        st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=3, max_size=8
    )
)
@settings(max_examples=60, deadline=None)
def test_bivariate_facets_support_property(pts):
    f = LaurentPoly.make(2, {e: 1 for e in pts})
    nd = newton_facets(fl(f))
    # every support point satisfies <mu, a> >= nu with equality somewhere
    for fac in nd.facets:
        vals = [sum(m * a for m, a in zip(fac.mu, e)) for e in pts]
        assert min(vals) == fac.nu[0]
