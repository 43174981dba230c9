"""Cayley matrices, A-hypergeometric residual checks, Gale duals, and the
Euler-Mellin / Mellin-Barnes bridge.

Derivatives of analytic germs in the coefficients c are taken with Cauchy's
integral formula on small circles (spectrally accurate and stable up to the
third mixed derivatives needed by the box operators).
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .coamoeba import TorusPoint, lopsided_membership
from .emquad import EMProblem, em_integral, mb_integral
from .errors import (
    DerivativeUnstable,
    LopsidedMembership,
    NoNonsingularBlock,
    PoleOnContour,
)
from .laurent import FactorList, LaurentPoly
from .numeric import (
    IntMatrix,
    bareiss_det,
    complex_gamma,
    gcd_maximal_minors,
    integer_rank,
    integer_kernel,
)

TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class CayleySystem:
    A: IntMatrix  # (m + n) x r with block indicator rows on top
    col_factor: tuple  # factor index per column
    col_exponent: tuple  # exponent vector (length n) per column
    m: int
    n: int
    beta: tuple = None  # -(t, s) when parameters are attached

    @property
    def r(self) -> int:
        return self.A.cols


def cayley_matrix(fs: FactorList, s=None, t=None) -> CayleySystem:
    """Cayley matrix of the factor supports: indicator rows over exponent rows.

    Columns are ordered by factor index, then lexicographically by exponent
    (the storage order of the factor terms).
    """
    m, n = fs.m, fs.n_vars
    col_factor = []
    col_exponent = []
    for i, f in enumerate(fs.factors):
        for e, _ in f.terms:
            col_factor.append(i)
            col_exponent.append(e)
    r = len(col_factor)
    rows = []
    for i in range(m):
        rows.append([1 if col_factor[j] == i else 0 for j in range(r)])
    for d in range(n):
        rows.append([col_exponent[j][d] for j in range(r)])
    beta = None
    if s is not None and t is not None:
        beta = tuple(-complex(v) for v in t) + tuple(-complex(v) for v in s)
    return CayleySystem(
        A=IntMatrix.from_rows(rows),
        col_factor=tuple(col_factor),
        col_exponent=tuple(col_exponent),
        m=m,
        n=n,
        beta=beta,
    )


def coefficients_of(fs: FactorList) -> tuple:
    """Coefficient vector of the factors in Cayley column order."""
    return tuple(c for f in fs.factors for _, c in f.terms)


def factors_with_coefficients(sys: CayleySystem, c) -> FactorList:
    """Rebuild the factor list from replacement coefficients in column order."""
    c = [complex(x) for x in c]
    polys = []
    n = sys.n
    for i in range(sys.m):
        coeffs = {
            sys.col_exponent[j]: c[j]
            for j in range(sys.r)
            if sys.col_factor[j] == i
        }
        polys.append(LaurentPoly.make(n, coeffs))
    return FactorList.make(polys)


# --------------------------------------------------------------------------
# Cauchy-circle differentiation


def _circle_derivatives(germ, c0, j: int, nodes: int, radius: float):
    """All c_j derivative data on one circle: values and FFT coefficients."""
    c0 = list(c0)
    vals = np.empty(nodes, dtype=complex)
    for k in range(nodes):
        ck = list(c0)
        ck[j] = c0[j] + radius * cmath.exp(TWO_PI_I * k / nodes)
        vals[k] = germ(ck)
    coeffs = np.fft.fft(vals) / nodes  # coeffs[k] = a_k * radius**k (k < nodes)
    return coeffs


def euler_residual(sys: CayleySystem, germ, c0, i: int, nodes: int = 32,
                   radius_frac: float = 0.05) -> float:
    """Relative residual of the i-th Euler operator E_i - beta_i on the germ."""
    if sys.beta is None:
        raise ValueError("CayleySystem carries no homogeneity parameter")
    c0 = [complex(x) for x in c0]
    phi0 = complex(germ(c0))
    acc = 0j
    arow = sys.A.entries[i]
    for j in range(sys.r):
        if arow[j] == 0:
            continue
        radius = radius_frac * abs(c0[j])
        coeffs = _circle_derivatives(germ, c0, j, nodes, radius)
        tail = abs(coeffs[nodes // 2])
        if tail > 1e-3 * (1 + np.abs(coeffs).max()):
            raise DerivativeUnstable(
                f"Cauchy coefficients for c_{j} decay too slowly"
            )
        deriv = coeffs[1] / radius
        acc += arow[j] * c0[j] * deriv
    return abs(acc - sys.beta[i] * phi0) / (1 + abs(phi0))


def _mixed_derivative(germ, c0, orders: dict, radius_frac: float):
    """d^{orders} germ / prod dc_j^{orders[j]} via tensor Cauchy circles."""
    if not orders:
        return complex(germ(list(c0)))
    c0 = [complex(x) for x in c0]
    act = sorted(orders)
    nodes = [max(8, 2 * orders[j] + 2) for j in act]
    radii = [radius_frac * abs(c0[j]) for j in act]
    shape = tuple(nodes)
    vals = np.empty(shape, dtype=complex)
    for idx in itertools.product(*(range(N) for N in nodes)):
        ck = list(c0)
        for pos, j in enumerate(act):
            ck[j] = c0[j] + radii[pos] * cmath.exp(
                TWO_PI_I * idx[pos] / nodes[pos]
            )
        vals[idx] = germ(ck)
    coeffs = np.fft.fftn(vals) / np.prod(shape)
    sel = tuple(orders[j] for j in act)
    out = coeffs[sel]
    for pos, j in enumerate(act):
        out *= math.factorial(orders[j]) / radii[pos] ** orders[j]
    return complex(out)


def box_residual(sys: CayleySystem, germ, c0, u, radius_frac: float = 0.05) -> float:
    """Relative residual of the box operator for a kernel vector u."""
    u = [int(x) for x in u]
    plus = {j: v for j, v in enumerate(u) if v > 0}
    minus = {j: -v for j, v in enumerate(u) if v < 0}
    dplus = _mixed_derivative(germ, c0, plus, radius_frac)
    dminus = _mixed_derivative(germ, c0, minus, radius_frac)
    scale = max(abs(dplus), abs(dminus))
    return abs(dplus - dminus) / (1 + scale)


# --------------------------------------------------------------------------
# Gale dual


@dataclass(frozen=True)
class GaleData:
    B: IntMatrix  # r x kappa, rows in the original column order of A
    B_permuted: IntMatrix  # rows in the [zero column | A_I | A_II] order
    D: tuple  # positive diagonal entries
    a0: tuple  # top row of -B_permuted (the -a0 D row), as integers
    perm: tuple  # permuted column order (indices into the original order)
    block_I: tuple  # original indices of the A_I columns
    det_A_I: int
    g_A: int
    g_B: int

    @property
    def kappa(self) -> int:
        return self.B.cols


def gale_dual(sys: CayleySystem) -> GaleData:
    """Dual matrix in the block form [-a0; A_I^{-1} A_II; -I] D.

    Requires the single-factor Cayley shape [1 ... 1; exponents] with a zero
    exponent column; A_I is the lexicographically first nonsingular block.
    The ratio identity g_B |det A_I| = g_A |det D| is asserted exactly.
    """
    if sys.m != 1:
        raise NoNonsingularBlock(
            "dual construction implemented for single-factor systems"
        )
    n, r = sys.n, sys.r
    zero_cols = [j for j in range(r) if all(x == 0 for x in sys.col_exponent[j])]
    if not zero_cols:
        raise NoNonsingularBlock("no zero exponent column to anchor the block form")
    j0 = zero_cols[0]
    rest = [j for j in range(r) if j != j0]
    block = None
    for comb in itertools.combinations(rest, n):
        sub = [[sys.col_exponent[j][d] for j in comb] for d in range(n)]
        if bareiss_det(sub) != 0:
            block = comb
            break
    if block is None:
        raise NoNonsingularBlock("no nonsingular n x n exponent block")
    others = [j for j in rest if j not in block]
    kappa = len(others)
    perm = (j0,) + block + tuple(others)
    AI = [[Fraction(sys.col_exponent[j][d]) for j in block] for d in range(n)]
    det_A_I = bareiss_det([[int(x) for x in row] for row in AI])

    def solve_AI(rhs):
        # Gaussian elimination over Fractions
        aug = [row[:] + [rhs[d]] for d, row in enumerate(AI)]
        for col in range(n):
            piv = next(i for i in range(col, n) if aug[i][col] != 0)
            aug[col], aug[piv] = aug[piv], aug[col]
            pv = aug[col][col]
            aug[col] = [x / pv for x in aug[col]]
            for i in range(n):
                if i != col and aug[i][col] != 0:
                    f = aug[i][col]
                    aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
        return [aug[d][n] for d in range(n)]

    cols = []
    Ds = []
    a0s = []
    for l, j in enumerate(others):
        rhs = [Fraction(sys.col_exponent[j][d]) for d in range(n)]
        x = solve_AI(rhs)
        a0 = sum(x) - 1
        denom = 1
        for v in x + [a0]:
            denom = denom * v.denominator // math.gcd(denom, v.denominator)
        Dl = denom
        col = [-(a0 * Dl)] + [v * Dl for v in x]
        col += [(-Dl if i == l else 0) for i in range(kappa)]
        cols.append([int(v) for v in col])
        Ds.append(Dl)
        a0s.append(int(a0 * Dl))
    if kappa:
        B_perm_rows = [[cols[l][i] for l in range(kappa)] for i in range(r)]
    else:
        B_perm_rows = [[] for _ in range(r)]
    # verify A B = 0 exactly in the permuted order
    for irow in range(sys.m + n):
        arow = sys.A.entries[irow]
        for l in range(kappa):
            assert sum(arow[perm[i]] * B_perm_rows[i][l] for i in range(r)) == 0
    inv = {p: i for i, p in enumerate(perm)}
    B_rows = [B_perm_rows[inv[j]] for j in range(r)]
    g_A = gcd_maximal_minors([list(row) for row in sys.A.entries])
    detD = 1
    for d in Ds:
        detD *= d
    if kappa:
        g_B = gcd_maximal_minors(B_rows)
        B = IntMatrix.from_rows(B_rows)
        B_perm = IntMatrix.from_rows(B_perm_rows)
    else:
        g_B = 1
        B = IntMatrix(rows=r, cols=0, entries=tuple(() for _ in range(r)))
        B_perm = B
    assert g_B * abs(det_A_I) == g_A * abs(detD), "dual ratio identity failed"
    return GaleData(
        B=B,
        B_permuted=B_perm,
        D=tuple(Ds),
        a0=tuple(a0s),
        perm=perm,
        block_I=block,
        det_A_I=det_A_I,
        g_A=g_A,
        g_B=g_B,
    )


# --------------------------------------------------------------------------
# Euler-Mellin / Mellin-Barnes bridge


def _solve_gamma(sys: CayleySystem, gale: GaleData, s, t) -> list:
    """Parameters with A gamma = -(t, s) in the permuted column order.

    gamma_II is set to a small negative constant and gamma_I, gamma_0 follow;
    the constant is increased until every Re gamma_i is safely negative.
    """
    n = sys.n
    block = gale.block_I
    others = [j for j in gale.perm[1 + n :]]
    AIf = np.array(
        [[sys.col_exponent[j][d] for j in block] for d in range(n)], dtype=float
    )
    AIIf = np.array(
        [[sys.col_exponent[j][d] for j in others] for d in range(n)], dtype=float
    )
    sv = np.array([complex(v) for v in s])
    t = complex(t[0] if isinstance(t, (tuple, list)) else t)
    for eps in (0.05, 0.11, 0.23, 0.41):
        gII = np.full(len(others), -eps, dtype=complex)
        rhs = -sv - (AIIf @ gII if len(others) else 0.0)
        gI = np.linalg.solve(AIf, rhs)
        g0 = -t - complex(np.sum(gI)) - complex(np.sum(gII))
        gamma = [g0] + list(gI) + list(gII)
        if all(g.real < -1e-6 for g in gamma):
            return gamma
    raise PoleOnContour("could not normalize gamma with negative real parts")


def em_mb_check(sys: CayleySystem, gale: GaleData, fs: FactorList, c, theta,
                s, t, tol: float = 1e-8) -> float:
    """Relative residual of g_B L^theta(c) = (2 pi i)^kappa e^{-i<s,theta>}
    Gamma(t) g_A M_f^theta(c) for a single-factor system."""
    if gale.kappa == 0:
        raise ValueError("identity requires r > m + n (nonempty dual)")
    th = theta if isinstance(theta, TorusPoint) else TorusPoint.make(theta)
    fs_c = factors_with_coefficients(sys, c)
    if lopsided_membership(fs_c.factors[0], th):
        raise LopsidedMembership("theta inside the closure of the lopsided "
                                 "coamoeba")
    s = tuple(complex(v) for v in s)
    tval = complex(t[0] if isinstance(t, (tuple, list)) else t)
    M = em_integral(EMProblem.make(fs_c, th, s, (tval,)), tol).value
    gamma = _solve_gamma(sys, gale, s, (tval,))
    c = [complex(x) for x in c]
    c_perm = [c[j] for j in gale.perm]
    alphas_perm = [sys.col_exponent[j] for j in gale.perm]
    L = mb_integral(
        gale.B_permuted, gamma, c_perm, tol, theta=th, alphas=alphas_perm
    ).value
    lhs = gale.g_B * L
    rhs = (
        (TWO_PI_I) ** gale.kappa
        * cmath.exp(-1j * sum(si * ti for si, ti in zip(s, th.theta)))
        * complex_gamma(tval)
        * gale.g_A
        * M
    )
    return abs(lhs - rhs) / abs(rhs)


# --------------------------------------------------------------------------
# solution-space rank and nonresonance


def independence_rank(germs, c0, max_order: int = 2, nodes: int = 8,
                      radius_frac: float = 0.05) -> int:
    """Numerical rank of the span of analytic germs at c0.

    Taylor coefficients up to order max_order in each variable are extracted
    by a tensor Cauchy grid (one FFT per germ); the matrix of naturally
    scaled coefficients is ranked by SVD with cutoff 1e-6 of the top
    singular value.
    """
    c0 = [complex(x) for x in c0]
    r = len(c0)
    radii = [radius_frac * abs(x) for x in c0]
    rows = []
    # per-variable orders up to max_order; a total-degree cutoff is too small
    # a jet to separate germs that agree through the Euler homogeneities
    multi = list(itertools.product(range(max_order + 1), repeat=r))
    for germ in germs:
        vals = np.empty((nodes,) * r, dtype=complex)
        for idx in itertools.product(range(nodes), repeat=r):
            ck = [
                c0[j] + radii[j] * cmath.exp(TWO_PI_I * idx[j] / nodes)
                for j in range(r)
            ]
            vals[idx] = germ(ck)
        coeffs = np.fft.fftn(vals) / nodes**r  # a_kappa prod radii**kappa
        row = np.array([coeffs[k] for k in multi])
        peak = np.abs(row).max()
        if peak == 0:
            raise DerivativeUnstable("germ is numerically zero on the grid")
        rows.append(row / peak)
    mat = np.array(rows)
    sv = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(sv > 1e-6 * sv[0]))


@dataclass(frozen=True)
class NonresonanceVerdict:
    nonresonant: bool
    bound: int
    hit: tuple = None  # (column subset, normal h, lattice value) on failure

    def __bool__(self) -> bool:
        return self.nonresonant


def total_nonresonance_check(sys: CayleySystem, beta, bound: int = 10
                             ) -> NonresonanceVerdict:
    """Bounded search for resonances of beta + Z^{m+n} against the
    hyperplanes spanned by m + n - 1 independent columns of A."""
    if bound < 1:
        raise ValueError("bound must be at least 1")
    d = sys.m + sys.n
    beta = [complex(x) for x in beta]
    cols = [sys.A.column(j) for j in range(sys.r)]
    seen_normals = set()
    for comb in itertools.combinations(range(sys.r), d - 1):
        sub = [list(cols[j]) for j in comb]
        if integer_rank(sub) < d - 1:
            continue
        kern = integer_kernel(sub)
        assert len(kern) == 1
        h = kern[0]
        if h in seen_normals or tuple(-x for x in h) in seen_normals:
            continue
        seen_normals.add(h)
        g = math.gcd(*(abs(x) for x in h))
        hb = sum(hi * bi for hi, bi in zip(h, beta))
        if abs(hb.imag) > 1e-9:
            continue
        # <h, beta + k> = 0 has an integer solution k iff <h, beta> in g Z;
        # the bounded search admits |<h, k>| <= bound * sum |h_i|
        reach = bound * sum(abs(x) for x in h)
        val = hb.real
        nearest = g * round(val / g) if g else 0.0
        if abs(val - nearest) < 1e-9 and abs(nearest) <= reach:
            return NonresonanceVerdict(False, bound, (comb, h, nearest))
    return NonresonanceVerdict(True, bound)
