"""Meromorphic continuation of Euler-Mellin integrals in (s, t).

One continuation step integrates by parts against a facet direction mu_k:
a term carrying shift (beta, q) is replaced by one child per monomial of

    g = sum_i (t_i + q) f'_i prod_{l != i} f_l,

with shift (beta + alpha, q + 1), an extra numerator factor affine in t,
and an extra denominator <mu_k, s> - <nu_k, t> + d with d the facet
distance of beta.  Iterating moves the convergence domain far enough that
every shifted integral can be computed by direct quadrature, exhibiting
the continued value as a rational combination of convergent integrals.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .emquad import EMProblem, em_integral
from .errors import (
    LimitUnstable,
    NotFullDimensional,
    NotInConvergenceDomain,
    PoleHit,
    TermBudgetExceeded,
    TermIntegralDiverged,
)
from .laurent import FactorList, face_derivative, face_value
from .numeric import complex_gamma, reciprocal_gamma
from .polytope import NewtonData, is_full_dimensional, pole_semigroup
from .coamoeba import TorusPoint
from .emquad import newton_data_for

DEFAULT_TERM_BUDGET = 10**6

_DENOM_TOL = 1e-8


def _dot(mu, v) -> complex:
    return sum(m * x for m, x in zip(mu, v))


@dataclass(frozen=True)
class AffineForm:
    """a . s + b . t + const as a function of (s, t)."""

    coeff_s: tuple
    coeff_t: tuple
    constant: complex

    def eval(self, s, t) -> complex:
        return (
            sum(a * v for a, v in zip(self.coeff_s, s))
            + sum(b * v for b, v in zip(self.coeff_t, t))
            + self.constant
        )


def _poly_eval(poly: dict, t) -> complex:
    total = 0j
    for exps, coef in poly.items():
        v = coef
        for e, ti in zip(exps, t):
            v *= ti**e
        total += v
    return total


def _poly_mul_affine(poly: dict, coeff_t, constant) -> dict:
    """Multiply a polynomial in t by an affine function of t."""
    out: dict = {}
    for exps, coef in poly.items():
        if constant != 0:
            out[exps] = out.get(exps, 0j) + coef * constant
        for i, b in enumerate(coeff_t):
            if b != 0:
                e2 = list(exps)
                e2[i] += 1
                e2 = tuple(e2)
                out[e2] = out.get(e2, 0j) + coef * b
    return {e: c for e, c in out.items() if c != 0}


def _poly_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0j) + c
    return {e: c for e, c in out.items() if c != 0}


@dataclass(frozen=True)
class ContinuationTerm:
    beta: tuple  # accumulated monomial shift in Z^n
    q: int  # accumulated power shift
    numerator: tuple  # polynomial in t: sorted ((t-exponents), coeff) pairs
    denominator: tuple  # sorted (facet index, distance d) pairs

    def numerator_dict(self) -> dict:
        return dict(self.numerator)


_gpoly_cache: dict = {}


def _g_data(fs: FactorList, nd: NewtonData, k: int):
    """Per-facet data: map alpha -> per-factor coefficient vector of g.

    The entry for alpha lists, for each factor i, the coefficient of
    z^alpha in f'_i prod_{l != i} f_l; the t-affine numerator factor for a
    step at power shift q is then sum_i (t_i + q) * entry_i.
    """
    key = (fs.key(), k)
    data = _gpoly_cache.get(key)
    if data is not None:
        return data
    fac = nd.facets[k]
    m = fs.m
    table: dict = {}
    for i in range(m):
        poly = face_derivative(fs.factors[i], fac.mu, fac.nu[i])
        for l in range(m):
            if l != i:
                poly = poly * fs.factors[l]
        for e, c in poly.terms:
            vec = table.setdefault(e, [0j] * m)
            vec[i] += c
    data = {e: tuple(v) for e, v in table.items() if any(x != 0 for x in v)}
    _gpoly_cache[key] = data
    return data


class ContinuationExpr:
    """A finite sum of shifted Euler-Mellin integrals with rational prefactors."""

    def __init__(self, factors, theta, terms=None, steps=(),
                 realized_premerge=frozenset(), budget=None):
        fs = factors if isinstance(factors, FactorList) else FactorList.make(factors)
        self.factors = fs
        self.theta = theta if isinstance(theta, TorusPoint) else TorusPoint.make(theta)
        self.nd = newton_data_for(fs)
        n, m = fs.n_vars, fs.m
        if terms is None:
            terms = (
                ContinuationTerm(
                    beta=tuple([0] * n),
                    q=0,
                    numerator=((tuple([0] * m), 1.0 + 0j),),
                    denominator=(),
                ),
            )
        self.terms = tuple(terms)
        self.steps = tuple(steps)
        self.realized_premerge = frozenset(realized_premerge)
        if budget is None:
            budget = int(os.environ.get("EMGKZ_TERM_BUDGET", DEFAULT_TERM_BUDGET))
        self.budget = budget

    # -- construction -------------------------------------------------

    def step(self, k: int) -> "ContinuationExpr":
        """Integrate every term by parts once against facet k."""
        if not is_full_dimensional(self.nd):
            raise NotFullDimensional("Newton polytope is not full-dimensional")
        fac = self.nd.facets[k]
        gdata = _g_data(self.factors, self.nd, k)
        assert gdata, "facet derivative vanished on a full-dimensional polytope"
        merged: dict = {}
        realized = set(self.realized_premerge)
        for term in self.terms:
            dd = face_value(fac.mu, term.beta) - term.q * fac.nu_sum
            assert (k, dd) not in term.denominator, "repeated denominator factor"
            denom = tuple(sorted(term.denominator + ((k, dd),)))
            realized.add((k, dd))
            numer = term.numerator_dict()
            for alpha, vec in gdata.items():
                child_numer = _poly_mul_affine(numer, vec,
                                               term.q * sum(vec))
                if not child_numer:
                    continue
                beta = tuple(b + a for b, a in zip(term.beta, alpha))
                key = (beta, term.q + 1, denom)
                if key in merged:
                    merged[key] = _poly_add(merged[key], child_numer)
                else:
                    merged[key] = child_numer
                if len(merged) > self.budget:
                    raise TermBudgetExceeded(
                        f"more than {self.budget} continuation terms"
                    )
        terms = tuple(
            ContinuationTerm(
                beta=beta, q=q,
                numerator=tuple(sorted(numer.items())),
                denominator=denom,
            )
            for (beta, q, denom), numer in sorted(merged.items())
            if numer
        )
        return ContinuationExpr(
            self.factors, self.theta, terms, self.steps + (k,),
            realized, self.budget,
        )

    # -- planning -----------------------------------------------------

    def plan(self, s, t, max_steps: int = 200) -> list:
        """Greedy facet sequence making every shifted integral convergent.

        Repeatedly appends the facet with the most negative worst-case
        margin until all margins are positive and all shifted powers have
        positive real part.  Each step at facet k raises the k-margin of
        every term by at least the facet distance d_k and never lowers any
        other margin, so the loop terminates.
        """
        if not is_full_dimensional(self.nd):
            raise NotFullDimensional("Newton polytope is not full-dimensional")
        sigma = [complex(v).real for v in s]
        tau = [complex(v).real for v in t]
        facets = self.nd.facets
        shifts = {(term.beta, term.q) for term in self.terms}
        gsupports = [
            sorted(_g_data(self.factors, self.nd, k)) for k in range(len(facets))
        ]
        plan: list = []
        for _ in range(max_steps):
            worst = [
                min(
                    _dot(fac.mu, sigma).real + face_value(fac.mu, beta)
                    - sum(v * (ta + q) for v, ta in zip(fac.nu, tau))
                    for beta, q in shifts
                )
                for fac in facets
            ]
            tau_bad = any(min(tau) + q <= 0 for _, q in shifts)
            if min(worst) > 0 and not tau_bad:
                return plan
            k = int(np.argmin(worst))
            plan.append(k)
            shifts = {
                (tuple(b + a for b, a in zip(beta, alpha)), q + 1)
                for beta, q in shifts
                for alpha in gsupports[k]
            }
        raise TermBudgetExceeded(f"plan did not close within {max_steps} steps")

    def apply_plan(self, s, t) -> "ContinuationExpr":
        expr = self
        for k in self.plan(s, t):
            expr = expr.step(k)
        return expr

    # -- evaluation ---------------------------------------------------

    def _term_values(self, s, t, tol: float) -> list:
        """Per-term values numerator/denominator * shifted integral."""
        s = tuple(complex(v) for v in s)
        t = tuple(complex(v) for v in t)
        facets = self.nd.facets
        cache: dict = {}
        out = []
        for term in self.terms:
            den = 1.0 + 0j
            for k, d in term.denominator:
                fac = facets[k]
                v = (_dot(fac.mu, s)
                     - sum(nv * tv for nv, tv in zip(fac.nu, t)) + d)
                if abs(v) < _DENOM_TOL:
                    raise PoleHit(
                        f"denominator for facet {fac.mu} + {d} vanishes at (s, t)"
                    )
                den *= v
            key = (term.beta, term.q)
            integral = cache.get(key)
            if integral is None:
                shifted = EMProblem.make(
                    self.factors,
                    self.theta,
                    tuple(si + bi for si, bi in zip(s, term.beta)),
                    tuple(ti + term.q for ti in t),
                )
                try:
                    integral = em_integral(shifted, tol, check=False).value
                except NotInConvergenceDomain as exc:
                    raise TermIntegralDiverged(str(exc)) from exc
                cache[key] = integral
            out.append(_poly_eval(term.numerator_dict(), t) / den * integral)
        return out

    def eval_M(self, s, t, tol: float = 1e-9) -> complex:
        """Continued Euler-Mellin value at (s, t)."""
        return sum(self._term_values(s, t, tol))

    def gamma_arguments(self, s, t) -> list:
        s = tuple(complex(v) for v in s)
        t = tuple(complex(v) for v in t)
        return [
            _dot(fac.mu, s) - sum(nv * tv for nv, tv in zip(fac.nu, t))
            for fac in self.nd.facets
        ]

    def _phi_regular(self, s, t, tol: float) -> complex:
        rg = 1.0 + 0j
        for a in self.gamma_arguments(s, t):
            rg *= reciprocal_gamma(a)
        # multiply each term by the reciprocal-gamma product before summing
        # to tame cancellation between large terms
        return sum(v * rg for v in self._term_values(s, t, tol))

    def _vanishing_forms(self, s, t) -> list:
        s = tuple(complex(v) for v in s)
        t = tuple(complex(v) for v in t)
        facets = self.nd.facets
        seen = set()
        forms = []
        for term in self.terms:
            for k, d in term.denominator:
                if (k, d) in seen:
                    continue
                seen.add((k, d))
                fac = facets[k]
                v = (_dot(fac.mu, s)
                     - sum(nv * tv for nv, tv in zip(fac.nu, t)) + d)
                if abs(v) < _DENOM_TOL:
                    forms.append(tuple(fac.mu) + tuple(-x for x in fac.nu))
        return forms

    def eval_phi(self, s, t, tol: float = 1e-9, seed: int = 0) -> complex:
        """The entire factor Phi = M / prod Gamma(<mu_k,s> - <nu_k,t>).

        On a pole hyperplane of the rational prefactors the value is the
        directional limit along a seeded random direction, extrapolated by
        a Richardson triangle over h in {1e-2, 5e-3, 2.5e-3, 1.25e-3}.
        The fourth level is needed when the limit is a multiple zero, where
        three levels leave an O(h^3) residue above tolerance.
        """
        s = tuple(complex(v) for v in s)
        t = tuple(complex(v) for v in t)
        forms = self._vanishing_forms(s, t)
        if not forms:
            return self._phi_regular(s, t, tol)
        n, m = len(s), len(t)
        rng = np.random.default_rng(seed)
        for _ in range(100):
            d = rng.standard_normal(n + m)
            d /= np.linalg.norm(d)
            if all(
                abs(sum(fi * di for fi, di in zip(form, d)))
                > 1e-3 * math.sqrt(sum(abs(fi) ** 2 for fi in form))
                for form in forms
            ):
                break
        else:  # pragma: no cover - a valid direction always exists
            raise LimitUnstable("could not find a limit direction")
        ds, dt = d[:n], d[n:]

        def F(h: float) -> complex:
            return self._phi_regular(
                tuple(si + h * di for si, di in zip(s, ds)),
                tuple(ti + h * di for ti, di in zip(t, dt)),
                tol,
            )

        hs = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
        R = [[F(h)] for h in hs]
        for i in range(1, len(hs)):
            for j in range(1, i + 1):
                R[i].append(
                    (2**j * R[i][j - 1] - R[i - 1][j - 1]) / (2**j - 1)
                )
        value = R[-1][-1]
        if abs(value - R[-1][-2]) > 1e-4 * (1 + abs(value)):
            raise LimitUnstable(
                f"pole-limit extrapolation error {abs(value - R[-1][-2]):.2e}"
            )
        return value

    # -- reporting ----------------------------------------------------

    def pole_lattice(self, k: int, bound: int) -> dict:
        """Pole semigroup of facet k versus the distances the expression
        actually realized (before and after term merging)."""
        from .laurent import product

        supp = product(self.factors).support()
        semigroup = pole_semigroup(self.nd, k, supp, bound)
        realized = sorted(
            {d for term in self.terms for kk, d in term.denominator if kk == k}
        )
        premerge = sorted({d for kk, d in self.realized_premerge if kk == k})
        return {
            "semigroup": sorted(semigroup),
            "realized": realized,
            "realized_premerge": premerge,
            "gaps": sorted(set(range(bound + 1)) - semigroup),
        }


def rank_jump_extract(expr: ContinuationExpr, tol: float = 1e-11,
                      seed: int = 0) -> tuple:
    """Leading coefficients of Phi at the crossing (s, t) = (-2, -1).

    Phi itself carries a forced zero from the reciprocal of Gamma(t) at
    t = -1; the entire regularization Gamma(t) Phi is used instead.  Near
    the crossing Gamma(t) Phi = Phi_1 (4t - s + 2) + Phi_2 (s + 2) + higher
    order; directional derivatives along two generic directions in the
    coordinates u = s + 2, v = 4t - s + 2 determine (Phi_1, Phi_2) by a
    2x2 solve.
    """
    dirs = [(1.0, 0.37), (0.41, 1.0)]
    derivs = []
    for (du, dv) in dirs:

        def F(h: float) -> complex:
            u, v = h * du, h * dv
            s = (-2.0 + u,)
            t = (-1.0 + (u + v) / 4.0,)
            return complex_gamma(t[0]) * expr._phi_regular(s, t, tol) / h

        f1, f2, f3 = F(1e-2), F(5e-3), F(2.5e-3)
        r1 = 2 * f2 - f1
        r1p = 2 * f3 - f2
        r2 = (4 * r1p - r1) / 3
        if abs(r2 - r1p) > 1e-3 * (1 + abs(r2)):
            raise LimitUnstable(
                f"rank-jump extrapolation error {abs(r2 - r1p):.2e}"
            )
        derivs.append(r2)
    # derivs[i] = Phi_2 * du_i + Phi_1 * dv_i
    a = np.array([[dirs[0][1], dirs[0][0]], [dirs[1][1], dirs[1][0]]])
    phi1, phi2 = np.linalg.solve(a, np.array(derivs))
    return complex(phi1), complex(phi2)
