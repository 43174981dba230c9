"""Coamoebas, lopsided coamoebas, complement components, and zonotopes.

One variable is handled exactly through root arguments; two variables use a
raster over the argument torus (fiber roots via companion matrices) plus
exact treatment of the edge coamoebas.  Membership decisions that fall
within the boundary tolerance raise Inconclusive rather than guessing.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import Inconclusive, LopsidedMembership, OnBoundary
from .laurent import FactorList, LaurentPoly, face_value
from .polytope import newton_facets, _primitive

TWO_PI = 2.0 * math.pi


def reduce_angle(a: float) -> float:
    """Reduce to the canonical interval [-pi, pi)."""
    a = math.fmod(a + math.pi, TWO_PI)
    if a < 0:
        a += TWO_PI
    return a - math.pi


@dataclass(frozen=True)
class TorusPoint:
    """A point of the argument torus, stored with its real lift.

    The lift matters: the Euler-Mellin prefactor e^{i<s,theta>} is not
    2 pi-periodic, so theta and theta + 2 pi k give values differing by an
    exact monodromy phase.  Membership tests reduce to [-pi, pi) on demand.
    """

    theta: tuple

    @staticmethod
    def make(angles) -> "TorusPoint":
        return TorusPoint(tuple(float(a) for a in angles))

    def reduced(self) -> tuple:
        return tuple(reduce_angle(a) for a in self.theta)

    def __len__(self):
        return len(self.theta)


def _angdist(a: float, b: float) -> float:
    d = abs(reduce_angle(a - b))
    return min(d, TWO_PI - d) if d > math.pi else d


@dataclass(frozen=True)
class ComponentAtlas:
    n_vars: int
    # n = 1
    excluded: tuple = ()
    arcs: tuple = ()  # (start, end, representative) triples, start < end on circle
    # n = 2
    resolution: int = 0
    marked: object = None  # bool array, indexed [pixel1, pixel2]
    labels: object = None
    components: tuple = ()  # dicts {label, representative, pixels, reliable}

    def representatives(self) -> list:
        if self.n_vars == 1:
            return [TorusPoint.make([a["rep"]]) for a in self.arcs]
        return [TorusPoint.make(c["representative"]) for c in self.components]


# --------------------------------------------------------------------------
# one variable: exact via root arguments


def _poly_roots(f: LaurentPoly) -> np.ndarray:
    """Roots on the punctured plane of a one-variable Laurent polynomial."""
    exps = sorted(e[0] for e in f.support())
    lo, hi = exps[0], exps[-1]
    if hi == lo:
        return np.array([], dtype=complex)
    coeffs = np.zeros(hi - lo + 1, dtype=complex)
    for e, c in f.terms:
        coeffs[hi - e[0]] = c  # np.roots wants highest degree first
    return np.roots(coeffs)


def univariate_components(f: LaurentPoly) -> ComponentAtlas:
    """Complement arcs of the coamoeba of a one-variable polynomial.

    The coamoeba is the finite set of root arguments; arguments closer than
    1e-7 are merged into one excluded angle.  Representatives sit at arc
    midpoints.
    """
    if f.n_vars != 1:
        raise ValueError("univariate_components requires one variable")
    roots = _poly_roots(f)
    if roots.size == 0:
        rep = 0.0
        return ComponentAtlas(
            n_vars=1, excluded=(), arcs=(({"start": -math.pi, "end": math.pi,
                                           "rep": rep}),)
        )
    args = sorted(reduce_angle(a) for a in np.angle(roots))
    merged = []
    for a in args:
        if merged and _angdist(a, merged[-1]) < 1e-7:
            continue
        merged.append(a)
    if len(merged) > 1 and _angdist(merged[0], merged[-1]) < 1e-7:
        merged.pop()
    excluded = tuple(merged)
    arcs = []
    k = len(excluded)
    for i in range(k):
        start = excluded[i]
        end = excluded[(i + 1) % k] if i + 1 < k else excluded[0] + TWO_PI
        if k == 1:
            end = start + TWO_PI
        span = end - start
        arcs.append({"start": start, "end": end,
                     "rep": reduce_angle(start + span / 2)})
    return ComponentAtlas(n_vars=1, excluded=excluded, arcs=tuple(arcs))


# --------------------------------------------------------------------------
# two variables: raster


def _coeff_table_z2(f: LaurentPoly):
    """Coefficients of f as a polynomial in z2 with z1-polynomial entries."""
    e2s = sorted({e[1] for e in f.support()})
    lo2, hi2 = e2s[0], e2s[-1]
    table = {d: {} for d in range(hi2 - lo2 + 1)}
    for (e1, e2), c in f.terms:
        table[e2 - lo2][e1] = table[e2 - lo2].get(e1, 0j) + c
    return table, hi2 - lo2


def _edge_lines(f: LaurentPoly) -> list:
    """Exact edge-coamoeba lines: pairs (direction e, angle offset phi).

    Each line is {theta : <e, theta> = phi (mod 2pi)}, coming from the roots
    of the univariate reduction of an edge truncation of f.
    """
    nd = newton_facets(FactorList.make([f]))
    lines = []
    for fac in nd.facets:
        mu = fac.mu
        e = _primitive((-mu[1], mu[0]))
        terms = [(a, c) for a, c in f.terms if face_value(mu, a) == fac.nu[0]]
        if len(terms) < 2:
            continue
        base = terms[0][0]
        # exponents along the edge are base + j*e with integer j
        coeffs = {}
        for a, c in terms:
            diff = (a[0] - base[0], a[1] - base[1])
            if e[0] != 0:
                j = diff[0] // e[0]
            else:
                j = diff[1] // e[1]
            coeffs[j] = c
        h = LaurentPoly.univariate(coeffs)
        for w in _poly_roots(h):
            lines.append((e, reduce_angle(cmath.phase(complex(w)))))
    return lines


def _mark_line(marked: np.ndarray, e, phi: float):
    """Mark the raster pixels of the line <e, theta> = phi (mod 2pi)."""
    res = marked.shape[0]
    step = TWO_PI / res
    centers = -math.pi + (np.arange(res) + 0.5) * step
    e1, e2 = e
    if e2 == 0:
        # vertical lines theta1 = (phi + 2 pi k)/e1
        for k in range(-abs(e1) - 1, abs(e1) + 2):
            t1 = (phi + TWO_PI * k) / e1
            if -math.pi <= t1 < math.pi:
                i = int((t1 + math.pi) / step) % res
                marked[i, :] = True
                marked[(i + 1) % res, :] = True
                marked[(i - 1) % res, :] = True
        return
    for k in range(-(abs(e1) + abs(e2)) - 1, abs(e1) + abs(e2) + 2):
        t2 = (phi + TWO_PI * k - e1 * centers) / e2
        inside = (t2 >= -math.pi) & (t2 < math.pi)
        idx1 = np.nonzero(inside)[0]
        idx2 = ((t2[inside] + math.pi) / step).astype(int) % res
        marked[idx1, idx2] = True
        marked[idx1, (idx2 + 1) % res] = True
        marked[idx1, (idx2 - 1) % res] = True


_N_MODULI = 64
_N_ARGS = 1024


def _mark_fiber_roots(f: LaurentPoly, marked: np.ndarray):
    """Mark arg-pairs of zeros of f found on a log-polar grid of z1 fibers."""
    res = marked.shape[0]
    table, deg = _coeff_table_z2(f)
    if deg == 0:
        # z2-free up to a monomial: zeros sit over the roots of the z1 part
        g = LaurentPoly.univariate(table[0])
        for r in _poly_roots(g):
            i = int((reduce_angle(cmath.phase(complex(r))) + math.pi)
                    / (TWO_PI / res)) % res
            marked[i, :] = True
            marked[(i + 1) % res, :] = True
            marked[(i - 1) % res, :] = True
        return
    moduli = np.exp(np.linspace(-6.0, 6.0, _N_MODULI))
    phis = -math.pi + (np.arange(_N_ARGS) + 0.5) * TWO_PI / _N_ARGS
    z1 = moduli[:, None] * np.exp(1j * phis)[None, :]  # (64, 1024)
    z1 = z1.reshape(-1)
    npts = z1.size
    coeffs = np.zeros((npts, deg + 1), dtype=complex)
    for d in range(deg + 1):
        acc = np.zeros(npts, dtype=complex)
        for e1, c in table[d].items():
            acc += c * z1**e1
        coeffs[:, d] = acc
    scale = np.max(np.abs(coeffs), axis=1)
    lead_ok = np.abs(coeffs[:, deg]) > 1e-12 * scale
    pix1_all = np.tile(
        ((phis + math.pi) / (TWO_PI / res)).astype(int) % res, _N_MODULI
    )
    # batched companion matrices for the well-conditioned fibers
    idx = np.nonzero(lead_ok)[0]
    if idx.size:
        mon = coeffs[idx, :deg] / coeffs[idx, deg, None]
        comp = np.zeros((idx.size, deg, deg), dtype=complex)
        comp[:, 1:, :-1] = np.eye(deg - 1)
        comp[:, :, -1] = -mon
        roots = np.linalg.eigvals(comp)  # (idx.size, deg)
        good = np.abs(roots) > 1e-12
        p1 = np.repeat(pix1_all[idx], deg)[good.reshape(-1)]
        ang = np.angle(roots.reshape(-1)[good.reshape(-1)])
        ang = np.where(ang >= math.pi, ang - TWO_PI, ang)
        p2 = ((ang + math.pi) / (TWO_PI / res)).astype(int) % res
        marked[p1, p2] = True
    # degenerate leading coefficients: fall back to np.roots fiber by fiber
    for i in np.nonzero(~lead_ok)[0]:
        cs = coeffs[i]
        nz = np.nonzero(np.abs(cs) > 1e-12 * (scale[i] or 1.0))[0]
        if nz.size < 2:
            continue
        rts = np.roots(cs[: nz[-1] + 1][::-1])
        for r in rts:
            if abs(r) < 1e-12:
                continue
            p2 = int((reduce_angle(cmath.phase(complex(r))) + math.pi)
                     / (TWO_PI / res)) % res
            marked[pix1_all[i], p2] = True


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        while p != self.parent[p]:
            self.parent[p] = self.parent[self.parent[p]]
            p = self.parent[p]
        self.parent[x] = p
        return p

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def raster_coamoeba_2d(f: LaurentPoly, resolution: int = 512) -> ComponentAtlas:
    """Raster of the coamoeba of a two-variable polynomial on [-pi, pi)^2.

    Fibers over a log-polar z1 grid contribute zero arguments via companion
    eigenvalues; edge truncations are marked exactly as lines.  Unmarked
    pixels are flood-filled into torus-periodic complement components with
    representatives at the interior point farthest from the marked set.
    """
    if f.n_vars != 2:
        raise ValueError("raster_coamoeba_2d requires two variables")
    marked = np.zeros((resolution, resolution), dtype=bool)
    _mark_fiber_roots(f, marked)
    for e, phi in _edge_lines(f):
        _mark_line(marked, e, phi)
    labels, nlab = ndimage.label(~marked)
    uf = _UnionFind()
    for j in range(resolution):
        a, b = labels[0, j], labels[-1, j]
        if a and b:
            uf.union(a, b)
    for i in range(resolution):
        a, b = labels[i, 0], labels[i, -1]
        if a and b:
            uf.union(a, b)
    remap = np.zeros(nlab + 1, dtype=int)
    nexts = {}
    for lab in range(1, nlab + 1):
        root = uf.find(lab)
        remap[lab] = nexts.setdefault(root, len(nexts) + 1)
    labels = remap[labels]
    # torus-periodic distance to the marked set via a 3x3 tiling
    if marked.any():
        tiled = np.tile(marked, (3, 3))
        edt = ndimage.distance_transform_edt(~tiled)
        edt = edt[resolution : 2 * resolution, resolution : 2 * resolution]
    else:
        edt = np.full((resolution, resolution), float(resolution), dtype=float)
    components = []
    step = TWO_PI / resolution
    for lab in range(1, labels.max() + 1):
        mask = labels == lab
        count = int(mask.sum())
        if count == 0:
            continue
        dloc = np.where(mask, edt, -1.0)
        i, j = np.unravel_index(int(np.argmax(dloc)), dloc.shape)
        rep = (-math.pi + (i + 0.5) * step, -math.pi + (j + 0.5) * step)
        components.append(
            {
                "label": int(lab),
                "representative": rep,
                "pixels": count,
                "reliable": bool(dloc[i, j] >= 2.0),
            }
        )
    return ComponentAtlas(
        n_vars=2,
        resolution=resolution,
        marked=marked,
        labels=labels,
        components=tuple(components),
    )


_raster_cache: dict = {}


def cached_raster(f: LaurentPoly, resolution: int = 512) -> ComponentAtlas:
    key = (f.key(), resolution)
    atlas = _raster_cache.get(key)
    if atlas is None:
        atlas = raster_coamoeba_2d(f, resolution)
        _raster_cache[key] = atlas
    return atlas


# --------------------------------------------------------------------------
# membership


def lopsided_membership(f: LaurentPoly, theta: TorusPoint) -> bool:
    """True iff theta lies in the closure of the lopsided coamoeba.

    The point is outside exactly when the phasors c_alpha e^{i<alpha,theta>}
    all fit in an open half-plane, i.e. the sorted phasor angles leave a gap
    strictly greater than pi.
    """
    th = theta.theta
    angles = sorted(
        reduce_angle(cmath.phase(c) + sum(a * t for a, t in zip(e, th)))
        for e, c in f.terms
    )
    if len(angles) <= 1:
        return False
    gaps = [angles[i + 1] - angles[i] for i in range(len(angles) - 1)]
    gaps.append(angles[0] + TWO_PI - angles[-1])
    return max(gaps) <= math.pi + 1e-12


def _univariate_nonvanishing(f: LaurentPoly, theta1: float) -> bool:
    dmin = math.inf
    for r in _poly_roots(f):
        dmin = min(dmin, _angdist(theta1, cmath.phase(complex(r))))
    if dmin < 1e-12:
        return False
    if dmin <= 1e-9:
        raise Inconclusive(f"theta within {dmin:.2e} of a root argument")
    return True


def _edges_nonvanishing_2d(f: LaurentPoly, th) -> bool:
    for e, phi in _edge_lines(f):
        val = reduce_angle(e[0] * th[0] + e[1] * th[1] - phi)
        d = min(abs(val), TWO_PI - abs(val))
        if d < 1e-12:
            return False
        if d <= 1e-9:
            raise Inconclusive("theta within tolerance of an edge coamoeba")
    return True


def completely_nonvanishing_at(
    fs: FactorList, theta: TorusPoint, resolution: int = 512
) -> bool:
    """True iff every face truncation of every factor is zero-free on
    Arg^{-1}(theta).

    A negative lopsided test settles a factor immediately (it covers every
    truncation); otherwise vertices pass trivially, edges reduce to exact
    univariate root-argument tests, and the full polynomial uses the exact
    method in one variable or the cached raster with a one-pixel safety
    margin in two.
    """
    n = fs.n_vars
    if n > 2:
        raise ValueError("membership supported for at most two variables")
    th = theta.theta
    for f in fs.factors:
        if len(f.terms) == 1:
            continue  # monomials never vanish on the torus
        if not lopsided_membership(f, theta):
            continue
        if n == 1:
            if not _univariate_nonvanishing(f, th[0]):
                return False
            continue
        if not _edges_nonvanishing_2d(f, th):
            return False
        atlas = cached_raster(f, resolution)
        res = atlas.resolution
        step = TWO_PI / res
        i = int(math.floor((th[0] + math.pi) / step)) % res
        j = int(math.floor((th[1] + math.pi) / step)) % res
        if atlas.marked[i, j]:
            return False
        neighborhood = atlas.marked[
            np.ix_([(i - 1) % res, i, (i + 1) % res],
                   [(j - 1) % res, j, (j + 1) % res])
        ]
        if neighborhood.any():
            raise Inconclusive("theta within one raster pixel of the coamoeba")
    return True


def lopsided_complement_arcs(f: LaurentPoly, samples: int = 4096) -> list:
    """Complement arcs of the lopsided coamoeba of a one-variable polynomial.

    Sampled classification; returns (start, end, representative) per arc.
    """
    if f.n_vars != 1:
        raise ValueError("requires one variable")
    step = TWO_PI / samples
    angles = -math.pi + (np.arange(samples) + 0.5) * step
    outside = np.array(
        [not lopsided_membership(f, TorusPoint.make([a])) for a in angles]
    )
    if not outside.any():
        return []
    if outside.all():
        return [(-math.pi, math.pi, 0.0)]
    # rotate so the scan starts inside the lopsided set
    start0 = int(np.argmin(outside))
    arcs = []
    run = None
    for k in range(samples + 1):
        i = (start0 + k) % samples
        if outside[i] and run is None:
            run = k
        elif not outside[i] and run is not None:
            a0 = angles[(start0 + run) % samples]
            a1 = angles[(start0 + k - 1) % samples]
            span = (k - run) * step
            arcs.append((a0, a1, reduce_angle(a0 + span / 2)))
            run = None
    return arcs


# --------------------------------------------------------------------------
# order map


def order_map(fs: FactorList, theta: TorusPoint, B, alpha_base) -> tuple:
    """Order-map value v_alpha(theta) as a row vector times B.

    alpha_base picks one support point per factor; the entry order matches
    the Cayley column order (factor index, then exponent lexicographically),
    which is the row order of B.
    """
    th = theta.theta
    for f in fs.factors:
        if lopsided_membership(f, theta):
            raise LopsidedMembership(
                "theta lies in the closure of the lopsided coamoeba"
            )
    vec = []
    for j, f in enumerate(fs.factors):
        base = tuple(int(x) for x in alpha_base[j])
        cb = f.coeff(base)
        if cb == 0:
            raise ValueError(f"basepoint {base} not in the support of factor {j}")
        pb = cmath.phase(cb) + sum(a * t for a, t in zip(base, th))
        for e, c in f.terms:
            arg = reduce_angle(cmath.phase(c) + sum(a * t for a, t in zip(e, th))
                               - pb)
            if math.pi - abs(arg) < 1e-9:
                raise OnBoundary(f"principal argument {arg} within 1e-9 of +/-pi")
            vec.append(arg)
    Bf = np.asarray(_rows_of(B), dtype=float)
    if Bf.shape[0] != len(vec):
        raise ValueError("B row count does not match the number of monomials")
    if Bf.shape[1] == 0:
        return ()
    return tuple(float(x) for x in np.asarray(vec) @ Bf)


def _rows_of(B):
    entries = getattr(B, "entries", None)
    if entries is not None:
        return [list(r) for r in entries]
    return [list(r) for r in B]


# --------------------------------------------------------------------------
# zonotopes


@dataclass(frozen=True)
class Zonotope:
    generators: tuple  # rows b_1 ... b_r, each of length dim

    @staticmethod
    def from_matrix(B) -> "Zonotope":
        return Zonotope(tuple(tuple(int(x) for x in r) for r in _rows_of(B)))

    @property
    def dim(self) -> int:
        return len(self.generators[0]) if self.generators else 0


def zonotope_contains(Z: Zonotope, p) -> bool:
    """Strict interior membership of p in {(pi/2) sum mu_i b_i : |mu_i| < 1}."""
    p = [float(x) for x in p]
    gens = [g for g in Z.generators]
    r = len(gens)
    dim = Z.dim
    if dim != len(p):
        raise ValueError("dimension mismatch")
    if dim == 0:
        return True
    if dim == 1:
        bound = (math.pi / 2) * sum(abs(g[0]) for g in gens)
        return abs(p[0]) < bound - 1e-9
    from scipy.optimize import linprog

    # minimize z subject to -z <= mu_i <= z and (pi/2) B^T mu = p
    c = [0.0] * r + [1.0]
    A_ub = []
    b_ub = []
    for i in range(r):
        row = [0.0] * (r + 1)
        row[i], row[r] = 1.0, -1.0
        A_ub.append(row)
        row = [0.0] * (r + 1)
        row[i], row[r] = -1.0, -1.0
        A_ub.append(row)
        b_ub.extend([0.0, 0.0])
    A_eq = []
    for d in range(dim):
        A_eq.append([(math.pi / 2) * gens[i][d] for i in range(r)] + [0.0])
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=p,
        bounds=[(None, None)] * r + [(0, None)],
        method="highs",
    )
    if not res.success:
        return False
    return res.fun < 1.0 - 1e-9


def lattice_points_in_zonotope(Z: Zonotope, base, lattice_rows) -> list:
    """Translates of base by 2*pi*(integer row span of lattice_rows) strictly
    inside the zonotope."""
    from .numeric import lattice_basis

    base = np.asarray([float(x) for x in base])
    dim = Z.dim
    G = lattice_basis(_rows_of(lattice_rows))
    G = [g for g in G if any(x != 0 for x in g)]
    if not G:
        return [tuple(base)] if zonotope_contains(Z, base) else []
    Gm = np.asarray(G, dtype=float) * TWO_PI  # rank x dim
    rank = Gm.shape[0]
    # bounding box of the zonotope per coordinate
    R = np.array(
        [(math.pi / 2) * sum(abs(g[d]) for g in Z.generators) for d in range(dim)]
    )
    Gp = np.linalg.pinv(Gm)  # dim x rank
    corners = []
    for mask in range(2**dim):
        corner = np.array([R[d] if (mask >> d) & 1 else -R[d] for d in range(dim)])
        corners.append((corner - base) @ Gp)
    kmax = np.ceil(np.max(np.abs(np.asarray(corners)), axis=0)).astype(int) + 1
    out = []
    ranges = [range(-int(kmax[l]), int(kmax[l]) + 1) for l in range(rank)]
    import itertools

    for ks in itertools.product(*ranges):
        p = base + np.asarray(ks, dtype=float) @ Gm
        if zonotope_contains(Z, p):
            out.append(tuple(float(x) for x in p))
    return out
