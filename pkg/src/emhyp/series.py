"""Hypergeometric series evaluated by direct summation.

Used as reference oracles in tests and example reproductions; restricted to
arguments well inside the unit disc where the plain series converges fast.
"""

from __future__ import annotations

from .errors import ToleranceNotReached

_MAX_TERMS = 5000


def hyp2f1(a, b, c, x, tol: float = 1e-14) -> complex:
    """Gauss hypergeometric series sum_k (a)_k (b)_k / ((c)_k k!) x^k."""
    a, b, c, x = complex(a), complex(b), complex(c), complex(x)
    if abs(x) > 0.85:
        raise ValueError("series oracle restricted to |x| <= 0.85")
    total = 0j
    term = 1.0 + 0j
    for k in range(_MAX_TERMS):
        total += term
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * x
        if abs(term) <= tol * (1 + abs(total)) and k > 4:
            return total + term
    raise ToleranceNotReached("2F1 series did not converge")


def appell_f1(a, b1, b2, c, x, y, tol: float = 1e-14) -> complex:
    """Appell F1 double series sum (a)_{m+n}(b1)_m(b2)_n/((c)_{m+n} m! n!) x^m y^n.

    Summed as a single series of 2F1 values in y with x-Pochhammer weights.
    """
    a, b1, b2, c = complex(a), complex(b1), complex(b2), complex(c)
    x, y = complex(x), complex(y)
    if abs(x) > 0.85 or abs(y) > 0.85:
        raise ValueError("series oracle restricted to |x|, |y| <= 0.85")
    total = 0j
    weight = 1.0 + 0j  # (a)_m (b1)_m / ((c)_m m!) x^m
    for m in range(_MAX_TERMS):
        inner = hyp2f1(a + m, b2, c + m, y, tol=tol * 1e-2)
        total += weight * inner
        nxt = weight * (a + m) * (b1 + m) / ((c + m) * (m + 1)) * x
        if abs(nxt * inner) <= tol * (1 + abs(total)) and m > 4:
            return total
        weight = nxt
    raise ToleranceNotReached("F1 series did not converge")
