"""Complex gamma functions and exact integer linear algebra.

Gamma evaluation is delegated to scipy.special (Lanczos-type rational
approximation plus reflection), wrapped with the pole/branch-cut policies
used throughout the package.  All integer routines work with exact Python
integers; matrices are small (a handful of rows/columns), so exactness is
preferred over speed everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np
from scipy import special
from scipy.spatial import Delaunay, QhullError

from .errors import (
    BranchCutHit,
    DegenerateConfiguration,
    PoleAtNonpositiveInteger,
    RankDeficient,
)

_POLE_TOL = 1e-12


def _dist_to_nonpositive_integer(z: complex) -> float:
    if z.real > 0.5:
        return abs(z.real)
    n = round(z.real)
    if n > 0:
        n = 0
    return abs(z - n)


def complex_gamma(z) -> complex:
    """Gamma(z) for complex z, rejecting arguments at the poles."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise PoleAtNonpositiveInteger(f"non-finite argument {z!r}")
    if _dist_to_nonpositive_integer(z) <= _POLE_TOL:
        raise PoleAtNonpositiveInteger(f"gamma pole at {z!r}")
    return complex(special.gamma(z))


def reciprocal_gamma(z) -> complex:
    """1/Gamma(z); entire, vanishing at 0, -1, -2, ..."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == round(z.real):
        return 0.0 + 0.0j
    return complex(special.rgamma(z))


def log_gamma(z) -> complex:
    """Principal branch of log Gamma, continuous off (-inf, 0]."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0:
        raise BranchCutHit(f"log_gamma branch cut at {z!r}")
    return complex(special.loggamma(z))


# --------------------------------------------------------------------------
# exact integer matrices


@dataclass(frozen=True)
class IntMatrix:
    """Dense integer matrix with exact (arbitrary-precision) entries."""

    rows: int
    cols: int
    entries: tuple  # tuple of row tuples of python ints

    @staticmethod
    def from_rows(rows) -> "IntMatrix":
        data = []
        for row in rows:
            r = []
            for x in row:
                xi = int(x)
                if xi != x:
                    raise ValueError(f"entry {x!r} is not an exact integer")
                r.append(xi)
            data.append(tuple(r))
        if not data:
            raise ValueError("empty matrix")
        ncols = len(data[0])
        if any(len(r) != ncols for r in data):
            raise ValueError("ragged rows")
        return IntMatrix(len(data), ncols, tuple(data))

    def column(self, j):
        return tuple(self.entries[i][j] for i in range(self.rows))

    def to_numpy(self):
        return np.array(self.entries, dtype=object)

    def to_float(self):
        return np.array(self.entries, dtype=float)


def _as_rows(M):
    if isinstance(M, IntMatrix):
        return [list(r) for r in M.entries]
    return [[int(x) for x in row] for row in M]


def bareiss_det(rows) -> int:
    """Exact determinant of a square integer matrix (fraction-free)."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def integer_rank(rows) -> int:
    """Exact rank of an integer (or Fraction) matrix."""
    a = [[Fraction(x) for x in row] for row in rows]
    if not a:
        return 0
    nrows, ncols = len(a), len(a[0])
    rank = 0
    row = 0
    for col in range(ncols):
        piv = next((i for i in range(row, nrows) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        pv = a[row][col]
        for i in range(nrows):
            if i != row and a[i][col] != 0:
                f = a[i][col] / pv
                a[i] = [x - f * y for x, y in zip(a[i], a[row])]
        row += 1
        rank += 1
        if row == nrows:
            break
    return rank


def _vec_gcd(v):
    g = 0
    for x in v:
        g = math.gcd(g, abs(int(x)))
    return g


def integer_kernel(M) -> list:
    """Basis of the lattice {u integral : M u = 0}.

    Row-reduces over Q, clears denominators per basis vector, and divides
    by the gcd of the entries (saturation).  Every returned vector is
    verified to satisfy M u = 0 exactly.
    """
    rows = _as_rows(M)
    if not rows:
        return []
    nrows, ncols = len(rows), len(rows[0])
    a = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    row = 0
    for col in range(ncols):
        piv = next((i for i in range(row, nrows) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        pv = a[row][col]
        a[row] = [x / pv for x in a[row]]
        for i in range(nrows):
            if i != row and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[row])]
        pivots.append(col)
        row += 1
        if row == nrows:
            break
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for r, pcol in enumerate(pivots):
            v[pcol] = -a[r][fcol]
        denom = 1
        for x in v:
            denom = denom * x.denominator // math.gcd(denom, x.denominator)
        u = [int(x * denom) for x in v]
        g = _vec_gcd(u)
        if g > 1:
            u = [x // g for x in u]
        for mrow in rows:
            assert sum(m * x for m, x in zip(mrow, u)) == 0
        basis.append(tuple(u))
    return basis


def gcd_maximal_minors(M) -> int:
    """gcd of all maximal minors, exact; requires full rank."""
    rows = _as_rows(M)
    nrows, ncols = len(rows), len(rows[0])
    k = min(nrows, ncols)
    if integer_rank(rows) < k:
        raise RankDeficient("matrix is rank deficient")
    g = 0
    if nrows <= ncols:
        for cols in combinations(range(ncols), k):
            sub = [[rows[i][j] for j in cols] for i in range(k)]
            g = math.gcd(g, abs(bareiss_det(sub)))
    else:
        for rsel in combinations(range(nrows), k):
            sub = [[rows[i][j] for j in range(k)] for i in rsel]
            g = math.gcd(g, abs(bareiss_det(sub)))
    return g


def normalized_volume(A) -> int:
    """Normalized volume of a homogeneous column configuration.

    The first row of A must be all ones.  Returns d! times the Euclidean
    volume of the convex hull of the columns together with the origin,
    where d is the number of rows.
    """
    rows = _as_rows(A)
    d = len(rows)
    if any(x != 1 for x in rows[0]):
        raise ValueError("first row must be all ones (homogeneous form)")
    ncols = len(rows[0])
    pts = [tuple(rows[i][j] for i in range(d)) for j in range(ncols)]
    pts.append(tuple([0] * d))
    pts = sorted(set(pts))
    if integer_rank([[p[i] - pts[0][i] for i in range(d)] for p in pts]) < d:
        raise DegenerateConfiguration("configuration is not full-dimensional")
    if len(pts) == d + 1:
        # a single simplex; Delaunay needs at least d + 2 points
        edges = [[pts[i + 1][k] - pts[0][k] for k in range(d)] for i in range(d)]
        return abs(bareiss_det(edges))
    arr = np.array(pts, dtype=float)
    try:
        tri = Delaunay(arr, qhull_options="QJ Pp")
    except QhullError as exc:  # pragma: no cover - guarded by rank check
        raise DegenerateConfiguration(str(exc)) from exc
    total = 0
    for simplex in tri.simplices:
        verts = [pts[i] for i in simplex]
        edges = [[verts[i + 1][k] - verts[0][k] for k in range(d)] for i in range(d)]
        total += abs(bareiss_det(edges))
    if total == 0:
        raise DegenerateConfiguration("zero volume")
    return total


def lattice_basis(rows) -> list:
    """Basis (Hermite-style) of the integer lattice generated by the rows."""
    work = [list(map(int, r)) for r in rows if any(x != 0 for x in r)]
    if not work:
        return []
    ncols = len(work[0])
    basis = []
    col = 0
    while col < ncols and work:
        nz = [r for r in work if r[col] != 0]
        rest = [r for r in work if r[col] == 0]
        if not nz:
            work = rest
            col += 1
            continue
        # reduce the column to a single nonzero entry by gcd steps
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            out = [piv]
            for r in nz[1:]:
                q = r[col] // piv[col]
                rr = [x - q * y for x, y in zip(r, piv)]
                if rr[col] != 0:
                    out.append(rr)
                elif any(x != 0 for x in rr):
                    rest.append(rr)
            nz = out
        basis.append(nz[0])
        work = rest
        col += 1
    return [tuple(b) for b in basis]
