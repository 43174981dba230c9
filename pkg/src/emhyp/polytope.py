"""Newton polytopes: facet normals, per-factor offsets, margins, distances.

Hulls are computed exactly over the integers for one and two variables.  In
three variables scipy's convex hull supplies the combinatorics and the
integer normals are reconstructed exactly from facet vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateConfiguration, EmptySupport
from .laurent import FactorList, face_value


def _primitive(v):
    g = 0
    for x in v:
        g = math.gcd(g, abs(int(x)))
    if g == 0:
        raise ValueError("zero normal")
    return tuple(int(x) // g for x in v)


def _affine_rank(points) -> int:
    pts = list(points)
    if len(pts) <= 1:
        return 0
    base = pts[0]
    from .numeric import integer_rank

    return integer_rank([[p[i] - base[i] for i in range(len(base))] for p in pts[1:]])


def _hull_normals_1d(points) -> list:
    return [(1,), (-1,)]


def _orient2(a, b, c) -> int:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _hull_2d(points) -> list:
    """Vertices of the 2-D convex hull, counterclockwise (monotone chain)."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and _orient2(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _orient2(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _hull_normals_2d(points) -> list:
    pts = sorted(set(points))
    rank = _affine_rank(pts)
    if rank == 0:
        raise DegenerateConfiguration("single point has no facets")
    if rank == 1:
        # segment: the two edge-orthogonal normals plus the two endpoints'
        # supporting normals along the segment direction
        d = tuple(pts[-1][i] - pts[0][i] for i in range(2))
        d = _primitive(d)
        return [_primitive((-d[1], d[0])), _primitive((d[1], -d[0])), d,
                tuple(-x for x in d)]
    hull = _hull_2d(pts)
    normals = []
    for a, b in zip(hull, hull[1:] + hull[:1]):
        e = (b[0] - a[0], b[1] - a[1])
        # inward normal for counterclockwise orientation
        normals.append(_primitive((-e[1], e[0])))
    return normals


def _hull_normals_3d(points) -> list:
    from scipy.spatial import ConvexHull, QhullError

    pts = sorted(set(points))
    rank = _affine_rank(pts)
    if rank < 3:
        raise DegenerateConfiguration(
            "three-variable supports must span a full-dimensional polytope"
        )
    try:
        hull = ConvexHull(np.array(pts, dtype=float))
    except QhullError as exc:
        raise DegenerateConfiguration(str(exc)) from exc
    normals = set()
    interior = tuple(sum(p[i] for p in pts) for i in range(3))  # len(pts) * centroid
    npts = len(pts)
    for simplex in hull.simplices:
        a, b, c = (pts[i] for i in simplex)
        u = (b[0] - a[0], b[1] - a[1], b[2] - a[2])
        v = (c[0] - a[0], c[1] - a[1], c[2] - a[2])
        nrm = (
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        )
        if all(x == 0 for x in nrm):
            continue
        nrm = _primitive(nrm)
        # orient inward: <n, centroid> >= <n, a>, scaled by npts to stay integral
        side = sum(n * ci for n, ci in zip(nrm, interior)) - npts * sum(
            n * ai for n, ai in zip(nrm, a)
        )
        if side < 0:
            nrm = tuple(-x for x in nrm)
        normals.add(nrm)
    return sorted(normals)


def _support_normals(points, n: int) -> list:
    if n == 1:
        return _hull_normals_1d(points)
    if n == 2:
        return _hull_normals_2d(points)
    if n == 3:
        return _hull_normals_3d(points)
    raise ValueError("facet enumeration supports at most three variables")


@dataclass(frozen=True)
class Facet:
    mu: tuple  # primitive integer inward normal
    nu: tuple  # per-factor offsets min <mu, supp(f_i)>
    nu_sum: int


@dataclass(frozen=True)
class NewtonData:
    n_vars: int
    facets: tuple
    vertices: tuple  # per factor: tuple of hull vertex exponents

    def facet_index(self, mu) -> int:
        mu = tuple(int(x) for x in mu)
        for k, fac in enumerate(self.facets):
            if fac.mu == mu:
                return k
        raise KeyError(f"no facet with normal {mu}")


def _hull_vertices(points, n: int):
    pts = sorted(set(points))
    if n == 1:
        return (pts[0], pts[-1]) if len(pts) > 1 else (pts[0],)
    if n == 2 and _affine_rank(pts) == 2:
        return tuple(_hull_2d(pts))
    return tuple(pts)


def _minkowski_sum(supports) -> list:
    acc = [tuple([0] * len(supports[0][0]))]
    for supp in supports:
        nxt = {tuple(a + b for a, b in zip(p, q)) for p in acc for q in supp}
        acc = sorted(nxt)
        if len(acc) > 20000:
            raise ValueError("Minkowski sum support too large")
    return acc


def newton_facets(fs: FactorList) -> NewtonData:
    """Facet data of the Minkowski sum of the factor Newton polytopes.

    The facet normals are those of the sum polytope; this agrees with the
    union of the factor facet normals whenever every factor polytope is
    full-dimensional.  Each offset vector lists the per-factor minima of
    <mu, .> over the supports.  Facets are ordered lexicographically by mu.
    """
    n = fs.n_vars
    supports = [sorted(f.support()) for f in fs.factors]
    if any(not s for s in supports):
        raise EmptySupport("factor with empty support")
    total = _minkowski_sum(supports)
    if len(total) == 1:
        # the sum is a point: report the supporting axis normal pairs
        normals = {tuple(int(i == j) for j in range(n)) for i in range(n)}
        normals |= {tuple(-x for x in v) for v in list(normals)}
    else:
        normals = set(_support_normals(total, n))
    facets = []
    for mu in sorted(normals):
        nu = tuple(min(face_value(mu, a) for a in supp) for supp in supports)
        facets.append(Facet(mu=mu, nu=nu, nu_sum=sum(nu)))
    vertices = tuple(_hull_vertices(supp, n) for supp in supports)
    return NewtonData(n_vars=n, facets=tuple(facets), vertices=vertices)


def margin(nd: NewtonData, k: int, sigma, tau) -> float:
    """<mu_k, sigma> - <nu_k, tau>; all positive iff sigma in int(tau * Delta)."""
    fac = nd.facets[k]
    return float(
        sum(m * x for m, x in zip(fac.mu, sigma))
        - sum(v * y for v, y in zip(fac.nu, tau))
    )


def distance_d(nd: NewtonData, k: int, alpha) -> int:
    """Lattice distance <mu_k, alpha> - |nu_k| from alpha to facet k."""
    fac = nd.facets[k]
    return face_value(fac.mu, alpha) - fac.nu_sum


def step_distance(nd: NewtonData, k: int, g_support) -> int:
    supp = list(g_support)
    if not supp:
        raise EmptySupport("empty support")
    d = min(distance_d(nd, k, a) for a in supp)
    assert d > 0, "support touches the facet; expected strictly positive distance"
    return d


def is_full_dimensional(nd: NewtonData) -> bool:
    pts = sorted({v for vs in nd.vertices for v in vs})
    # Minkowski sum dimension equals the dimension of the union's span
    return _affine_rank(pts) == nd.n_vars


def pole_semigroup(nd: NewtonData, k: int, supp_f, bound: int) -> set:
    """Numerical semigroup generated by the positive facet distances, truncated."""
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    gens = sorted({distance_d(nd, k, a) for a in supp_f} - {0})
    out = {0}
    frontier = [0]
    while frontier:
        new = []
        for v in frontier:
            for g in gens:
                w = v + g
                if w <= bound and w not in out:
                    out.add(w)
                    new.append(w)
        frontier = new
    return out
