"""Sparse multivariate Laurent polynomials with complex coefficients.

Exponents are small signed integer vectors; coefficients are plain complex
numbers.  Parameter dependence (the exponents s, t) never lives here -- the
continuation engine keeps it in affine prefactors instead.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySupport, NotAFaceOffset, TermBlowup, ZeroOnPath

TERM_GUARD = 10**5
_COEFF_EPS = 0.0  # coefficients are dropped only when exactly zero


def _canon_exp(e, n_vars):
    e = tuple(int(x) for x in e)
    if len(e) != n_vars:
        raise ValueError(f"exponent {e} has wrong length (expected {n_vars})")
    return e


@dataclass(frozen=True)
class LaurentPoly:
    n_vars: int
    terms: tuple  # sorted tuple of (exponent tuple, complex coefficient)

    @staticmethod
    def make(n_vars: int, coeffs: dict) -> "LaurentPoly":
        items = []
        for e, c in coeffs.items():
            c = complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError(f"non-finite coefficient {c!r}")
            if c != 0:
                items.append((_canon_exp(e, n_vars), c))
        items.sort(key=lambda t: t[0])
        return LaurentPoly(n_vars, tuple(items))

    @staticmethod
    def univariate(coeffs) -> "LaurentPoly":
        """Convenience: 1-variable polynomial from {exponent: coeff}."""
        return LaurentPoly.make(1, {(e,): c for e, c in coeffs.items()})

    def support(self) -> set:
        return {e for e, _ in self.terms}

    def coeff(self, e) -> complex:
        e = tuple(int(x) for x in e)
        for ee, c in self.terms:
            if ee == e:
                return c
        return 0j

    def is_zero(self) -> bool:
        return not self.terms

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        if self.n_vars != other.n_vars:
            raise ValueError("variable-count mismatch")
        acc: dict = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = acc.get(e, 0j) + c1 * c2
        if len(acc) > TERM_GUARD:
            raise TermBlowup(f"product has {len(acc)} terms (guard {TERM_GUARD})")
        return LaurentPoly.make(self.n_vars, acc)

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        if self.n_vars != other.n_vars:
            raise ValueError("variable-count mismatch")
        acc = {e: c for e, c in self.terms}
        for e, c in other.terms:
            acc[e] = acc.get(e, 0j) + c
        return LaurentPoly.make(self.n_vars, acc)

    def scale(self, c) -> "LaurentPoly":
        return LaurentPoly.make(self.n_vars, {e: c * v for e, v in self.terms})

    def eval(self, z) -> complex:
        """Evaluate at a point of the complex torus (all z_j nonzero)."""
        z = [complex(v) for v in z]
        total = 0j
        for e, c in self.terms:
            v = c
            for zi, ei in zip(z, e):
                v *= zi**ei
            total += v
        return total

    def eval_exp(self, x, theta) -> complex:
        """Evaluate at z = exp(x + i*theta) componentwise."""
        w = [complex(xi, ti) for xi, ti in zip(x, theta)]
        total = 0j
        for e, c in self.terms:
            total += c * cmath.exp(sum(ei * wi for ei, wi in zip(e, w)))
        return total

    def eval_exp_grid(self, xgrids, theta) -> np.ndarray:
        """Evaluate on a tensor grid of log-moduli at fixed angles.

        xgrids is a list of n 1-D real arrays; returns an array of shape
        (len(xgrids[0]), ..., len(xgrids[n-1])).
        """
        n = self.n_vars
        shape = tuple(len(g) for g in xgrids)
        out = np.zeros(shape, dtype=complex)
        for e, c in self.terms:
            term = np.full((), c, dtype=complex)
            acc = None
            for j in range(n):
                col = np.exp(e[j] * (np.asarray(xgrids[j]) + 1j * theta[j]))
                sl = [None] * n
                sl[j] = slice(None)
                col = col[tuple(sl)]
                acc = col if acc is None else acc * col
            out += c * acc if acc is not None else c
        return out

    def to_json(self) -> dict:
        return {
            "n_vars": self.n_vars,
            "terms": [
                {"exp": list(e), "coeff": [c.real, c.imag]} for e, c in self.terms
            ],
        }

    @staticmethod
    def from_json(obj) -> "LaurentPoly":
        n = int(obj["n_vars"])
        coeffs = {}
        for t in obj["terms"]:
            e = tuple(int(x) for x in t["exp"])
            re, im = t["coeff"]
            coeffs[e] = coeffs.get(e, 0j) + complex(re, im)
        return LaurentPoly.make(n, coeffs)

    def key(self):
        return (self.n_vars, self.terms)


@dataclass(frozen=True)
class FactorList:
    factors: tuple

    @staticmethod
    def make(factors) -> "FactorList":
        fs = tuple(factors)
        if not fs:
            raise ValueError("need at least one factor")
        n = fs[0].n_vars
        if any(f.n_vars != n for f in fs):
            raise ValueError("factors disagree on variable count")
        if any(f.is_zero() for f in fs):
            raise EmptySupport("zero factor")
        return FactorList(fs)

    @property
    def n_vars(self) -> int:
        return self.factors[0].n_vars

    @property
    def m(self) -> int:
        return len(self.factors)

    def key(self):
        return tuple(f.key() for f in self.factors)


def support(p: LaurentPoly) -> set:
    return p.support()


def product(fs: FactorList) -> LaurentPoly:
    out = fs.factors[0]
    for f in fs.factors[1:]:
        out = out * f
    return out


def _check_face_offset(p: LaurentPoly, mu, nu: int):
    mu = tuple(int(x) for x in mu)
    vals = [sum(m * a for m, a in zip(mu, e)) for e in p.support()]
    if not vals:
        raise NotAFaceOffset("empty support")
    if min(vals) != nu:
        raise NotAFaceOffset(
            f"nu={nu} is not the minimum of <mu, alpha> (actual {min(vals)})"
        )
    return mu


def face_value(mu, e) -> int:
    return sum(int(m) * int(a) for m, a in zip(mu, e))


def truncate_to_face(p: LaurentPoly, mu, nu: int) -> LaurentPoly:
    """Sub-sum of p supported on the face <mu, alpha> = nu."""
    mu = _check_face_offset(p, mu, nu)
    kept = {e: c for e, c in p.terms if face_value(mu, e) == nu}
    return LaurentPoly.make(p.n_vars, kept)


def face_derivative(p: LaurentPoly, mu, nu: int) -> LaurentPoly:
    """d/dlambda of lambda^(-nu) p(lambda^mu z) at lambda = 1.

    The result is sum_alpha (<mu, alpha> - nu) c_alpha z^alpha; its support
    is disjoint from the face with offset nu.
    """
    mu = _check_face_offset(p, mu, nu)
    out = {}
    for e, c in p.terms:
        w = face_value(mu, e) - nu
        if w != 0:
            out[e] = w * c
    return LaurentPoly.make(p.n_vars, out)


_ZERO_TOL = 1e-13
_MAX_SUBDIV = 40


def _track_segment(f: LaurentPoly, x0, x1, theta, log0: complex) -> complex:
    """Continue log f(e^(x+i theta)) from x0 to x1 along a straight segment."""
    stack = [(tuple(x0), tuple(x1), f.eval_exp(x0, theta), 0)]
    log_val = log0
    scale = max(abs(c) for _, c in f.terms) or 1.0
    while stack:
        a, b, fa, depth = stack.pop()
        fb = f.eval_exp(b, theta)
        if abs(fb) < _ZERO_TOL * scale or abs(fa) < _ZERO_TOL * scale:
            raise ZeroOnPath("factor vanished along the tracking path")
        ratio = fb / fa
        if abs(cmath.phase(ratio)) < math.pi / 2:
            log_val += cmath.log(ratio)
            continue
        if depth >= _MAX_SUBDIV:
            raise ZeroOnPath("could not separate branch (likely a zero on path)")
        mid = tuple((u + v) / 2 for u, v in zip(a, b))
        # process the first half before the second: stack order is LIFO
        stack.append((mid, b, f.eval_exp(mid, theta), depth + 1))
        stack.append((a, mid, fa, depth + 1))
    return log_val


def eval_log_branch(fs: FactorList, x, theta, anchor=None) -> list:
    """Continuous log f_i(e^(x + i theta)) along the axis-ordered path.

    The branch is principal at the anchor (default: the origin) and is
    continued along segments that vary one coordinate at a time, in axis
    order.  exp of the returned values reproduces the factor values.
    """
    n = fs.n_vars
    x = [float(v) for v in x]
    theta = [float(v) for v in theta]
    if anchor is None:
        anchor = [0.0] * n
    anchor = [float(v) for v in anchor]
    out = []
    for f in fs.factors:
        fa = f.eval_exp(anchor, theta)
        if abs(fa) < _ZERO_TOL:
            raise ZeroOnPath("factor vanishes at the anchor")
        log_val = cmath.log(fa)
        cur = list(anchor)
        for axis in range(n):
            nxt = list(cur)
            nxt[axis] = x[axis]
            if nxt != cur:
                log_val = _track_segment(f, cur, nxt, theta, log_val)
            cur = nxt
        out.append(log_val)
    return out
