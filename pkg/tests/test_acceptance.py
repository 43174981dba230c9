"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with `pytest -s tests/test_acceptance.py` to see the lines live; they
are also emitted into the captured output of every run.
"""

import cmath
import math

import numpy as np
import pytest

from emhyp.coamoeba import (
    TorusPoint,
    Zonotope,
    cached_raster,
    completely_nonvanishing_at,
    lattice_points_in_zonotope,
    lopsided_membership,
    univariate_components,
)
from emhyp.continuation import ContinuationExpr, rank_jump_extract
from emhyp.emquad import (
    EMProblem,
    FixedGridEvaluator,
    em_integral,
    simplex_closed_form,
)
from emhyp.errors import Inconclusive
from emhyp.gkz import (
    box_residual,
    cayley_matrix,
    coefficients_of,
    em_mb_check,
    euler_residual,
    gale_dual,
    independence_rank,
    total_nonresonance_check,
)
from emhyp.laurent import (
    FactorList,
    LaurentPoly,
    face_derivative,
    truncate_to_face,
)
from emhyp.numeric import complex_gamma as G
from emhyp.numeric import integer_kernel, normalized_volume
from emhyp.polytope import newton_facets
from emhyp.series import hyp2f1


def report(criterion, ok, detail):
    line = f"[{criterion}] {'PASS' if ok else 'FAIL'}: {detail}"
    print(line, flush=True)
    assert ok, line


def germ_for(fs, theta, s, t, tol=1e-10):
    grid = FixedGridEvaluator(EMProblem.make(fs, theta, s, t), tol)

    def germ(c):
        coeffs, pos = [], 0
        for f in fs.factors:
            k = len(f.terms)
            coeffs.append(c[pos : pos + k])
            pos += k
        return grid.eval(coeffs)

    return germ


def test_01_beta_and_simplex_closed_forms():
    rng = np.random.default_rng(101)
    worst = 0.0
    f1 = LaurentPoly.univariate({0: 1, 1: 1})
    f2 = LaurentPoly.make(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1})
    for _ in range(10):
        s = rng.uniform(0.4, 1.5)
        t = s + rng.uniform(0.4, 1.5)
        val = em_integral(EMProblem.make([f1], [0.0], [s], [t]), 1e-10).value
        ref = G(s) * G(t - s) / G(t)
        worst = max(worst, abs(val - ref) / abs(ref))
    for _ in range(10):
        s1, s2 = rng.uniform(0.4, 1.2, size=2)
        t = s1 + s2 + rng.uniform(0.4, 1.2)
        val = em_integral(
            EMProblem.make([f2], [0.0, 0.0], [s1, s2], [t]), 1e-10
        ).value
        ref = G(s1) * G(s2) * G(t - s1 - s2) / G(t)
        worst = max(worst, abs(val - ref) / abs(ref))
    report(
        "C1 beta/simplex closed forms",
        worst <= 1e-8,
        f"worst relative error {worst:.2e} over 20 draws (tol 1e-8)",
    )


def test_02_t_simplex_closed_form():
    # exponent vectors are the columns of T
    Ts = [
        [[1, 1], [0, 2]],
        [[2, 1], [0, 1]],
        [[1, 0], [1, 2]],
        [[1, -1], [0, 1]],
        [[2, 0], [1, 2]],
    ]
    w = (0.5, 0.6)
    t = 1.9
    worst = 0.0
    for T in Ts:
        c1 = (T[0][0], T[1][0])
        c2 = (T[0][1], T[1][1])
        f = LaurentPoly.make(2, {(0, 0): 1, c1: 1, c2: 1})
        s = (
            T[0][0] * w[0] + T[0][1] * w[1],
            T[1][0] * w[0] + T[1][1] * w[1],
        )
        val = em_integral(EMProblem.make([f], [0.0, 0.0], s, [t]), 1e-9).value
        ref = simplex_closed_form(T, s, t)
        worst = max(worst, abs(val - ref) / abs(ref))
    report(
        "C2 T-simplex closed form",
        worst <= 1e-7,
        f"worst relative error {worst:.2e} over 5 matrices (tol 1e-7)",
    )


def test_03_gauss_2f1_identity():
    s, t1, t2 = 0.7, 0.8, 0.9
    worst = 0.0
    for c in (0.3, 0.8, cmath.exp(1j * math.pi / 4)):
        fA = LaurentPoly.univariate({0: 1, 1: 1})
        fB = LaurentPoly.univariate({0: c, 1: 1})
        val = em_integral(
            EMProblem.make([fA, fB], [0.0], [s], [t1, t2]), 1e-9
        ).value
        ref = (
            G(t1 + t2 - s) * G(s) / G(t1 + t2)
            * hyp2f1(t2, t1 + t2 - s, t1 + t2, 1 - c)
        )
        worst = max(worst, abs(val - ref) / abs(ref))
    report(
        "C3 Gauss 2F1 identity",
        worst <= 1e-6,
        f"worst relative error {worst:.2e} at three branch points (tol 1e-6)",
    )


def _second_rep_univariate(f, arc):
    span = arc["end"] - arc["start"]
    for frac in (0.25, 0.75, 0.4):
        cand = arc["start"] + frac * span
        if abs(cand - arc["rep"]) < 1e-6 * span:
            continue
        try:
            if completely_nonvanishing_at(
                FactorList.make([f]), TorusPoint.make([cand])
            ):
                return cand
        except Inconclusive:
            continue
    return None


def _second_rep_bivariate(f, rep):
    fs = FactorList.make([f])
    for off in ((0.17, 0.11), (-0.13, 0.08), (0.05, -0.19), (0.02, 0.03)):
        cand = TorusPoint.make((rep[0] + off[0], rep[1] + off[1]))
        try:
            if completely_nonvanishing_at(fs, cand):
                return cand
        except Inconclusive:
            continue
    return None


def test_04_theta_constancy():
    worst = 0.0
    checked = 0
    univariate = [
        LaurentPoly.univariate({0: 1, 1: 1}),
        LaurentPoly.univariate({0: 1, 1: 2, 2: 1}),
        LaurentPoly.univariate({0: 1, 2: 1, 3: 1, 6: 1j}),
        LaurentPoly.univariate({0: 1, 1: 1, 4: 1}),
        LaurentPoly.univariate({0: 2, 1: 1, 2: -1}),
    ]
    for f in univariate:
        fs = FactorList.make([f])
        s, t = (0.4,), (1.1,)
        for arc in univariate_components(f).arcs:
            other = _second_rep_univariate(f, arc)
            if other is None:
                continue
            # lift the representative into the arc's interval so both
            # evaluations use the same branch (theta is only 2pi-periodic
            # up to the monodromy phase e^{2pi i s})
            rep = arc["rep"]
            while rep < arc["start"]:
                rep += 2 * math.pi
            while rep > arc["end"]:
                rep -= 2 * math.pi
            v1 = em_integral(EMProblem.make(fs, [rep], s, t), 1e-9).value
            v2 = em_integral(EMProblem.make(fs, [other], s, t), 1e-9).value
            worst = max(worst, abs(v1 - v2) / (1 + abs(v1)))
            checked += 1
    bivariate = [
        LaurentPoly.make(2, {(0, 0): 1, (1, 0): 1j, (0, 1): 1j, (1, 1): 0.9}),
        LaurentPoly.make(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1}),
    ]
    for f in bivariate:
        fs = FactorList.make([f])
        s, t = (0.7, 0.7), (2.0,)
        atlas = cached_raster(f, 256)
        # check components of substantial area; thin fringe components hug
        # the coamoeba boundary where |f| dips toward zero on the contour
        # and the quadrature is intrinsically ill-conditioned
        big = [
            c
            for c in atlas.components
            if c["reliable"] and c["pixels"] >= 0.15 * atlas.resolution**2
        ]
        for comp in big:
            rep = comp["representative"]
            other = _second_rep_bivariate(f, rep)
            if other is None:
                continue
            v1 = em_integral(EMProblem.make(fs, rep, s, t), 1e-8).value
            v2 = em_integral(EMProblem.make(fs, other, s, t), 1e-8).value
            worst = max(worst, abs(v1 - v2) / (1 + abs(v1)))
            checked += 1
    report(
        "C4 theta-constancy",
        checked >= 10 and worst <= 1e-7,
        f"worst deviation {worst:.2e} across {checked} component pairs (tol 1e-7)",
    )


def test_05_continuation_correctness():
    f = LaurentPoly.univariate({0: 1, 1: 1})
    expr = ContinuationExpr([f], [0.0])
    worst_oracle = 0.0
    worst_plans = 0.0
    for s in (-0.5, -1.5, -2.5):
        a = expr.apply_plan((s,), (1.0,))
        va = a.eval_M((s,), (1.0,), 1e-10)
        ref = math.pi / math.sin(math.pi * s)
        worst_oracle = max(worst_oracle, abs(va - ref) / (1 + abs(ref)))
        b = expr
        for k in list(a.steps) + [0, 1]:
            b = b.step(k)
        vb = b.eval_M((s,), (1.0,), 1e-10)
        worst_plans = max(worst_plans, abs(va - vb) / (1 + abs(va)))
    ok = worst_oracle <= 1e-6 and worst_plans <= 1e-7
    report(
        "C5 continuation correctness",
        ok,
        f"oracle error {worst_oracle:.2e} (tol 1e-6), "
        f"plan independence {worst_plans:.2e} (tol 1e-7)",
    )


def _gkz_system_cases():
    # (name, factor builder from coefficient tuple, base points, s, t)
    def beta_f(c):
        return LaurentPoly.univariate({0: c[0], 1: c[1]})

    def gauss_f(c):
        return LaurentPoly.make(
            2, {(0, 0): c[0], (1, 0): c[1], (0, 1): c[2], (1, 1): c[3]}
        )

    def quartic_f(c):
        return LaurentPoly.univariate({0: c[0], 1: c[1], 3: c[2], 4: c[3]})

    def circuit_f(c):
        return LaurentPoly.univariate({0: c[0], 2: c[1], 3: c[2], 6: c[3]})

    return [
        ("beta", beta_f, [(1, 1), (1.3, 0.8), (0.9, 1.4)], (0.5,), (1.3,)),
        (
            "gauss",
            gauss_f,
            [(1, 1, 1, 0.5), (1.2, 0.9, 1.1, 0.7), (1, 0.8, 1.3, 0.6)],
            (0.3, 0.4),
            (1.1,),
        ),
        (
            "quartic-0134",
            quartic_f,
            [(1, 1, 1, 1), (1.1, 0.9, 1.3, 0.8), (1, 1.2, 0.7, 1.1)],
            (0.5,),
            (0.7,),
        ),
        (
            "circuit-0236",
            circuit_f,
            [(1, 1, 1, 1j), (1.1, 0.9, 1.2, 0.8j), (1, 1.3, 0.7, 1.1j)],
            (0.31,),
            (0.41,),
        ),
    ]


def _theta_for(fs):
    if fs.n_vars == 1:
        atlas = univariate_components(fs.factors[0])
        return atlas.representatives()[0]
    return TorusPoint.make([0.0, 0.0])


def test_06_gkz_residuals():
    worst_euler = 0.0
    worst_box = 0.0
    for name, build, points, s, t in _gkz_system_cases():
        for c0 in points:
            fs = FactorList.make([build(c0)])
            sys = cayley_matrix(fs, s=s, t=t)
            theta = _theta_for(fs)
            germ = germ_for(fs, theta, s, t)
            cvec = list(coefficients_of(fs))
            for i in range(len(sys.A.entries)):
                worst_euler = max(worst_euler, euler_residual(sys, germ, cvec, i))
            for u in integer_kernel(sys.A):
                worst_box = max(worst_box, box_residual(sys, germ, cvec, u))
    ok = worst_euler <= 1e-6 and worst_box <= 1e-3
    report(
        "C6 GKZ residuals",
        ok,
        f"worst Euler residual {worst_euler:.2e} (tol 1e-6), "
        f"worst box residual {worst_box:.2e} (tol 1e-3)",
    )


def test_07_rank_jump_reproduction():
    worst_zero = 0.0
    worst_extract = 0.0
    for c in ((1, 1, 1, 1), (1.2, 0.8, 1.1, 0.9), (0.9, 1.3, 0.7, 1.2)):
        f = LaurentPoly.univariate({0: c[0], 1: c[1], 3: c[2], 4: c[3]})
        expr = ContinuationExpr([f], [0.5]).apply_plan((-2.0,), (-1.0,))
        want1 = 2 * c[1] ** 2 / c[0]
        want2 = 2 * c[2] ** 2 / c[3]
        scale = max(abs(want1), abs(want2))
        phi = expr.eval_phi((-2.0,), (-1.0,), 1e-11)
        worst_zero = max(worst_zero, abs(phi) / (1 + scale))
        phi1, phi2 = rank_jump_extract(expr, tol=1e-11)
        worst_extract = max(
            worst_extract,
            abs(phi1 - want1) / abs(want1),
            abs(phi2 - want2) / abs(want2),
        )
    ok = worst_zero <= 1e-6 and worst_extract <= 1e-3
    report(
        "C7 rank-jump reproduction",
        ok,
        f"|Phi(-2,-1)| scaled {worst_zero:.2e} (tol 1e-6), "
        f"extraction error {worst_extract:.2e} (tol 1e-3)",
    )


def test_08_em_mb_identity():
    cases = [
        ((1, 1, 1, 0.5), (0.3, 0.4), (1.1,)),
        ((1, 1, 1, 0.7), (0.2, 0.5), (1.3,)),
        ((1.1, 0.9, 1.2, 0.5), (0.3, 0.4), (1.1,)),
        ((1, 1, 1, 0.3), (0.4, 0.2), (0.9,)),
        ((0.8, 1.2, 1.0, 0.6), (0.35, 0.3), (1.2,)),
    ]
    worst = 0.0
    for c, s, t in cases:
        f = LaurentPoly.make(
            2, {(0, 0): c[0], (1, 0): c[1], (0, 1): c[2], (1, 1): c[3]}
        )
        fs = FactorList.make([f])
        sys = cayley_matrix(fs)
        gale = gale_dual(sys)
        res = em_mb_check(sys, gale, fs, c, [0.0, 0.0], s, t, 1e-8)
        worst = max(worst, res)
    report(
        "C8 EM-MB identity",
        worst <= 1e-5,
        f"worst residual {worst:.2e} over 5 admissible parameter sets (tol 1e-5)",
    )


def test_09_circuit_counts():
    f = LaurentPoly.univariate({0: 1, 2: 1, 3: 1, 6: 1j})
    fs = FactorList.make([f])
    atlas = univariate_components(f)
    arcs = len(atlas.arcs)
    sys = cayley_matrix(fs, s=(0.31,), t=(0.41,))
    gale = gale_dual(sys)
    Z = Zonotope.from_matrix(gale.B)
    rng = np.random.default_rng(202)
    max_pts = 0
    for _ in range(20):
        base = rng.uniform(-math.pi, math.pi, size=gale.kappa)
        max_pts = max(max_pts, len(lattice_points_in_zonotope(Z, base, gale.B)))
    assert bool(total_nonresonance_check(sys, sys.beta, bound=8))
    germs = [
        germ_for(fs, rep, (0.31,), (0.41,)) for rep in atlas.representatives()
    ]
    rank = independence_rank(germs, list(coefficients_of(fs)))
    ok = arcs == 6 and max_pts <= 5 and rank == 6
    report(
        "C9 circuit counts",
        ok,
        f"{arcs} arcs (want 6), max lattice count {max_pts} (want <= 5), "
        f"rank {rank} (want 6 = vol(A) = {normalized_volume(sys.A)})",
    )


def test_10_gauss_coamoeba_geometry():
    f0 = LaurentPoly.make(2, {(0, 0): 1, (1, 0): 1j, (0, 1): 1j, (1, 1): 0.9})
    atlas = cached_raster(f0, 512)
    res = atlas.resolution
    step = 2 * math.pi / res

    def label_at(t1, t2):
        i = int(math.floor((t1 + math.pi) / step)) % res
        j = int(math.floor((t2 + math.pi) / step)) % res
        assert not atlas.marked[i, j]
        return atlas.labels[i, j]

    distinct = label_at(0.0, 0.0) != label_at(-math.pi, -math.pi)
    s, t = (0.4, 0.3), (1.2,)
    g0 = LaurentPoly.make(2, {(0, 0): 1, (1, 0): -1j, (0, 1): -1j, (1, 1): 0.9})
    phi_f = ContinuationExpr([f0], [0.0, 0.0]).eval_phi(s, t, 1e-9)
    phi_g = ContinuationExpr([g0], [math.pi, math.pi]).eval_phi(s, t, 1e-9)
    want = cmath.exp(1j * math.pi * (s[0] + s[1])) * phi_f
    loop_err = abs(phi_g - want) / abs(want)
    ok = distinct and loop_err <= 1e-6
    report(
        "C10 Gauss coamoeba geometry",
        ok,
        f"(0,0)/(pi,pi) components distinct: {distinct}, "
        f"loop identity error {loop_err:.2e} (tol 1e-6)",
    )


def test_11_structural_invariants():
    # simple-pole factoredness: no repeated denominator factor in any term
    f = LaurentPoly.univariate({0: 1, 1: 1, 3: 1, 4: 1})
    expr = ContinuationExpr([f], [0.5]).apply_plan((-2.0,), (-1.0,))
    factored = all(
        len(set(term.denominator)) == len(term.denominator)
        for term in expr.terms
    )
    # margin-ledger integers: every realized distance is a nonneg integer in
    # the facet's pole semigroup
    ledger_ok = True
    for k in range(len(expr.nd.facets)):
        rep = expr.pole_lattice(k, 40)
        sg = set(rep["semigroup"])
        for d in rep["realized"]:
            ledger_ok = ledger_ok and isinstance(d, int) and (d in sg or d > 40)
    # face derivative has support disjoint from the face it truncates
    disjoint = True
    for poly in (
        f,
        LaurentPoly.make(2, {(0, 0): 1, (1, 0): 1j, (0, 1): 1j, (1, 1): 0.9}),
    ):
        nd = newton_facets(FactorList.make([poly]))
        for fac in nd.facets:
            face = truncate_to_face(poly, fac.mu, fac.nu[0])
            g = face_derivative(poly, fac.mu, fac.nu[0])
            disjoint = disjoint and not (g.support() & face.support())
    # complement of the lopsided coamoeba is inside the complement of the
    # coamoeba: no root argument at any theta outside the lopsided closure
    inclusion = True
    rng = np.random.default_rng(303)
    for poly in (
        LaurentPoly.univariate({0: 1, 1: 1}),
        LaurentPoly.univariate({0: 1, 2: 1, 3: 1, 6: 1j}),
        LaurentPoly.univariate({0: 2, 1: 1, 2: -1}),
    ):
        roots = np.roots(
            [poly.coeff((e,)) for e in range(max(x[0] for x in poly.support()), -1, -1)]
        )
        root_args = [cmath.phase(r) for r in roots if abs(r) > 0]
        for _ in range(300):
            th = rng.uniform(-math.pi, math.pi)
            if not lopsided_membership(poly, TorusPoint.make([th])):
                d = min(
                    min(abs(th - a), 2 * math.pi - abs(th - a)) for a in root_args
                )
                inclusion = inclusion and d > 1e-12
    ok = factored and ledger_ok and disjoint and inclusion
    report(
        "C11 structural invariants",
        ok,
        f"factored={factored}, ledger={ledger_ok}, "
        f"face-derivative disjoint={disjoint}, lopsided inclusion={inclusion}",
    )
