"""Quadrature for Euler-Mellin integrals and Mellin-Barnes integrals.

After the change of variables z = e^{x + i theta} the Euler-Mellin integrand
is analytic on R^n with exponential decay, so a truncated trapezoid rule
with step halving converges spectrally.  The Mellin-Barnes contour (i R)^k
is handled the same way with gamma products evaluated in log space.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .coamoeba import TorusPoint, Zonotope, completely_nonvanishing_at, \
    zonotope_contains
from .errors import (
    BranchTrackingFailed,
    ConvergenceConditionViolated,
    GammaPole,
    NotInConvergenceDomain,
    PoleAtNonpositiveInteger,
    PoleOnContour,
    SingularT,
    ToleranceNotReached,
)
from .laurent import FactorList
from .numeric import bareiss_det, complex_gamma
from .polytope import NewtonData, margin, newton_facets

_MAX_HALVINGS = 10
_MAX_POINTS = 2 * 10**7


@dataclass(frozen=True)
class EMProblem:
    factors: FactorList
    theta: TorusPoint
    s: tuple  # complex, length n
    t: tuple  # complex, length m
    anchor: tuple = None

    @staticmethod
    def make(factors, theta, s, t, anchor=None) -> "EMProblem":
        fs = factors if isinstance(factors, FactorList) else FactorList.make(factors)
        n = fs.n_vars
        th = theta if isinstance(theta, TorusPoint) else TorusPoint.make(theta)
        s = tuple(complex(v) for v in s)
        t = tuple(complex(v) for v in t)
        if len(th) != n or len(s) != n or len(t) != fs.m:
            raise ValueError("dimension mismatch in EMProblem")
        anchor = tuple(float(a) for a in anchor) if anchor else tuple([0.0] * n)
        return EMProblem(fs, th, s, t, anchor)


@dataclass(frozen=True)
class QuadratureReport:
    value: complex
    abs_error_estimate: float
    truncation_radius: float
    cells_evaluated: int


_newton_cache: dict = {}


def newton_data_for(fs: FactorList) -> NewtonData:
    key = fs.key()
    nd = _newton_cache.get(key)
    if nd is None:
        nd = newton_facets(fs)
        _newton_cache[key] = nd
    return nd


def _unit_directions(n: int, count: int = 256):
    if n == 1:
        return [(1.0,), (-1.0,)]
    return [
        (math.cos(2 * math.pi * k / count), math.sin(2 * math.pi * k / count))
        for k in range(count)
    ]


def _decay_rate(p: EMProblem) -> float:
    """Worst-case exponential decay rate of the integrand over ray directions."""
    sigma = [v.real for v in p.s]
    tau = [v.real for v in p.t]
    supports = [sorted(f.support()) for f in p.factors.factors]
    kmin = math.inf
    for u in _unit_directions(p.factors.n_vars):
        rate = -sum(si * ui for si, ui in zip(sigma, u))
        for ti, supp in zip(tau, supports):
            rate += ti * max(sum(a * ui for a, ui in zip(e, u)) for e in supp)
        kmin = min(kmin, rate)
    return kmin


def truncation_radius(p: EMProblem, tol: float) -> float:
    """Box radius outside which the integrand modulus falls below tol."""
    if tol >= 1.0:
        return 0.0
    kmin = _decay_rate(p)
    if kmin <= 0:
        raise NotInConvergenceDomain("integrand does not decay in some direction")
    return math.log(1.0 / tol) / kmin


def check_domain(p: EMProblem):
    nd = newton_data_for(p.factors)
    sigma = [v.real for v in p.s]
    tau = [v.real for v in p.t]
    if any(x <= 0 for x in tau):
        raise NotInConvergenceDomain(f"Re t = {tau} must be positive")
    for k in range(len(nd.facets)):
        if margin(nd, k, sigma, tau) <= 0:
            raise NotInConvergenceDomain(
                f"margin for facet {nd.facets[k].mu} is nonpositive"
            )
    return nd


def _branch_logs(F: np.ndarray, center) -> np.ndarray:
    """log F on the grid, continuous along axis-ordered paths from the center."""
    mag = np.abs(F)
    # factors legitimately decay like e^{-R} on the truncated box, so only an
    # underflow-level modulus indicates an actual zero on the contour
    if mag.min() < 1e-250:
        raise BranchTrackingFailed("factor vanishes (within tolerance) on the grid")
    ang = np.angle(F)
    if F.ndim == 1:
        ic = center[0]
        u = np.unwrap(ang)
        u += ang[ic] - u[ic]
        return np.log(mag) + 1j * u
    ic, jc = center
    col = np.unwrap(ang[:, jc])
    col += ang[ic, jc] - col[ic]
    u = np.unwrap(ang, axis=1)
    u += (col - u[:, jc])[:, None]
    return np.log(mag) + 1j * u


def _grid_value(p: EMProblem, h: float, R: float):
    """One trapezoid evaluation; returns (value, number of grid points)."""
    n = p.factors.n_vars
    M = max(1, int(math.ceil(R / h)))
    if (2 * M + 1) ** n > _MAX_POINTS:
        raise ToleranceNotReached("grid size limit exceeded")
    xgrids = [p.anchor[j] + h * np.arange(-M, M + 1) for j in range(n)]
    center = tuple(M for _ in range(n))
    theta = p.theta.theta
    log_int = np.zeros(tuple(len(g) for g in xgrids), dtype=complex)
    for j in range(n):
        sl = [None] * n
        sl[j] = slice(None)
        log_int = log_int + p.s[j] * xgrids[j][tuple(sl)]
    log_int = log_int + 1j * sum(sj * tj for sj, tj in zip(p.s, theta))
    for f, ti in zip(p.factors.factors, p.t):
        F = f.eval_exp_grid(xgrids, theta)
        log_int = log_int - ti * _branch_logs(F, center)
    value = complex(np.sum(np.exp(log_int))) * h**n
    return value, (2 * M + 1) ** n


def em_integral(p: EMProblem, tol: float = 1e-8, check: bool = True,
                h0: float = 0.5) -> QuadratureReport:
    """Euler-Mellin integral over Arg^{-1}(theta) by adaptive trapezoid rule.

    The integrand e^{<s,x> + i<s,theta>} prod f_i(e^{x+i theta})^{-t_i} uses
    the continuous logarithm branch anchored (principal) at the anchor
    point.  The step is halved until two refinement levels agree to tol.
    """
    check_domain(p)
    if check and not completely_nonvanishing_at(p.factors, p.theta):
        raise NotInConvergenceDomain("theta lies in the closure of the coamoeba")
    R = truncation_radius(p, min(tol, 1e-8) * 1e-2) + 2.0
    cells = 0
    prev = None
    h = h0
    for _ in range(_MAX_HALVINGS + 1):
        value, npts = _grid_value(p, h, R)
        cells += npts
        if prev is not None:
            err = abs(value - prev)
            if err <= tol * (1 + abs(value)):
                return QuadratureReport(value, err, R, cells)
        prev = value
        h /= 2
    raise ToleranceNotReached(
        f"trapezoid refinement stalled at h={2 * h:.3g} (em integral)"
    )


class FixedGridEvaluator:
    """Re-evaluates one Euler-Mellin integral for varying coefficients.

    The grid step and radius are adapted once at a base coefficient vector;
    afterwards eval() reuses precomputed per-monomial exponent grids, so a
    coefficient perturbation costs a few elementwise array operations.  The
    caller guarantees perturbations stay small enough that the adapted grid
    remains adequate (checked against a doubled-step estimate on demand).
    """

    def __init__(self, p: EMProblem, tol: float = 1e-9, h0: float = 0.5):
        check_domain(p)
        self.p = p
        self.tol = tol
        R = truncation_radius(p, min(tol, 1e-8) * 1e-2) + 2.0
        self.R = R
        h = h0
        prev = None
        for _ in range(_MAX_HALVINGS + 1):
            value, _ = _grid_value(p, h, R)
            if prev is not None and abs(value - prev) <= tol * (1 + abs(value)):
                break
            prev = value
            h /= 2
        else:
            raise ToleranceNotReached("fixed-grid adaptation failed")
        self.h = h
        n = p.factors.n_vars
        M = max(1, int(math.ceil(R / h)))
        self.center = tuple(M for _ in range(n))
        xgrids = [p.anchor[j] + h * np.arange(-M, M + 1) for j in range(n)]
        theta = p.theta.theta
        shape = tuple(len(g) for g in xgrids)
        # per-monomial grids exp(<alpha, x + i theta>) for every factor term
        self.monomial_grids = []
        for f in p.factors.factors:
            grids = []
            for e, _ in f.terms:
                acc = np.ones(shape, dtype=complex)
                for j in range(n):
                    sl = [None] * n
                    sl[j] = slice(None)
                    acc = acc * np.exp(e[j] * (xgrids[j] + 1j * theta[j]))[tuple(sl)]
                grids.append(acc)
            self.monomial_grids.append(grids)
        base = np.zeros(shape, dtype=complex)
        for j in range(n):
            sl = [None] * n
            sl[j] = slice(None)
            base = base + p.s[j] * xgrids[j][tuple(sl)]
        base = base + 1j * sum(sj * tj for sj, tj in zip(p.s, theta))
        self.prefactor = np.exp(base)

    def eval(self, coeffs) -> complex:
        """Value at replacement coefficients.

        coeffs is a list (one entry per factor) of coefficient sequences in
        the factor's term order.
        """
        p = self.p
        weight = self.prefactor
        acc = None
        for grids, cs, ti in zip(self.monomial_grids, coeffs, p.t):
            F = np.zeros(weight.shape, dtype=complex)
            for g, c in zip(grids, cs):
                F = F + complex(c) * g
            logs = _branch_logs(F, self.center)
            term = np.exp(-ti * logs)
            acc = term if acc is None else acc * term
        return complex(np.sum(weight * acc)) * self.h ** p.factors.n_vars


def simplex_closed_form(T, s, t) -> complex:
    """Closed form for factors of simplex type 1 + z^{T_1} + ... + z^{T_n}.

    Equals Gamma(w_1)...Gamma(w_n) Gamma(t - |w|) / (|det T| Gamma(t)) with
    w = T^{-1} s.
    """
    rows = [[int(x) for x in r] for r in getattr(T, "entries", T)]
    det = bareiss_det(rows)
    if det == 0:
        raise SingularT("exponent matrix is singular")
    s = np.asarray([complex(v) for v in s])
    w = np.linalg.solve(np.asarray(rows, dtype=float), s)
    t = complex(t)
    try:
        value = complex(1.0)
        for wi in w:
            value *= complex_gamma(wi)
        value *= complex_gamma(t - complex(np.sum(w)))
        value /= abs(det) * complex_gamma(t)
    except PoleAtNonpositiveInteger as exc:
        raise GammaPole(str(exc)) from exc
    return value


# --------------------------------------------------------------------------
# Mellin-Barnes


def _mb_log_integrand(Bf: np.ndarray, gamma: np.ndarray, logc: np.ndarray,
                      ys: np.ndarray) -> np.ndarray:
    """Log integrand at contour points w = i y; ys has shape (npts, kappa)."""
    z = gamma[None, :] + 1j * (ys @ Bf.T)  # gamma_i + <b_i, w>
    return np.sum(special.loggamma(-z) + z * logc[None, :], axis=1)


def mb_integral(B, gamma, c, tol: float = 1e-8, theta=None,
                alphas=None) -> QuadratureReport:
    """Mellin-Barnes integral over (i R)^kappa, kappa = column count of B.

    Computes int prod_i Gamma(-gamma_i - <b_i, w>) c_i^{gamma_i + <b_i, w>} dw
    with the contour through the origin.  When theta and the exponent
    columns alphas are given, c is first rotated to c_i e^{i <alpha_i, theta>}.
    """
    rows = [[int(x) for x in r] for r in getattr(B, "entries", B)]
    Bf = np.asarray(rows, dtype=float)
    r, kappa = Bf.shape
    gamma = np.asarray([complex(g) for g in gamma])
    c = np.asarray([complex(x) for x in c])
    if theta is not None and alphas is not None:
        th = theta.theta if isinstance(theta, TorusPoint) else tuple(theta)
        c = c * np.exp(
            1j * np.asarray([sum(a * t for a, t in zip(al, th)) for al in alphas])
        )
    if np.any(np.abs(c) == 0):
        raise ValueError("zero coefficient")
    argc = np.angle(c)
    if kappa == 0:
        value = complex(np.prod([complex_gamma(-g) for g in gamma])
                        * np.prod(c**gamma))
        return QuadratureReport(value, 0.0, 0.0, 1)
    Z = Zonotope(tuple(tuple(row) for row in rows))
    v = argc @ Bf
    if not zonotope_contains(Z, v):
        raise ConvergenceConditionViolated(
            "Arg(c) B is not in the interior of the zonotope"
        )
    for i in range(r):
        if np.any(Bf[i] != 0):
            re = -gamma[i].real
            if abs(re - round(re)) < 1e-8 and round(re) <= 0:
                raise PoleOnContour(f"gamma_{i} = {gamma[i]} puts a pole on the "
                                    "contour")
        else:
            complex_gamma(-gamma[i])  # raises on a pole of the constant factor
    # worst-case decay rate over contour directions
    dirs = _unit_directions(kappa, 128) if kappa > 1 else [(1.0,), (-1.0,)]
    rate = math.inf
    for u in dirs:
        uv = np.asarray(u)
        rate = min(
            rate,
            float(np.sum((math.pi / 2) * np.abs(Bf @ uv) + argc * (Bf @ uv))),
        )
    if rate <= 0:
        raise ConvergenceConditionViolated("gamma-product decay rate nonpositive")
    logc = np.log(np.abs(c)) + 1j * argc
    tol_inner = min(tol, 1e-8)
    W = (math.log(1.0 / tol_inner) + 10.0) / rate

    def grid_eval(h: float, W: float):
        M = max(1, int(math.ceil(W / h)))
        axes = [h * np.arange(-M, M + 1) for _ in range(kappa)]
        mesh = np.meshgrid(*axes, indexing="ij")
        ys = np.stack([m.reshape(-1) for m in mesh], axis=1)
        vals = np.exp(_mb_log_integrand(Bf, gamma, logc, ys))
        return complex(np.sum(vals)) * h**kappa, ys.shape[0]

    # push W outward until the boundary integrand is negligible
    for _ in range(5):
        corner = np.full((1, kappa), W)
        boundary = abs(np.exp(_mb_log_integrand(Bf, gamma, logc, corner))[0])
        if boundary < tol_inner:
            break
        W *= 2
    cells = 0
    prev = None
    h = 0.25
    for _ in range(_MAX_HALVINGS + 1):
        value, npts = grid_eval(h, W)
        cells += npts
        if prev is not None:
            err = abs(value - prev)
            if err <= tol * (1 + abs(value)):
                value *= 1j**kappa  # dw = i^kappa dy
                return QuadratureReport(value, err, W, cells)
        prev = value
        h /= 2
    raise ToleranceNotReached("trapezoid refinement stalled (mb integral)")
