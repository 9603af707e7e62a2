"""One-dimensional sums behind the two-dimensional lattice sums.

Every lattice sum we need reduces, after grouping by m = max(k1, k2), to
sums of the shape

    sum_{m=a}^{b} m^-p (alpha + beta H(m))

with H the harmonic numbers. Small m are summed term by term; large m go
through Hurwitz zeta differences (and their s-derivative for the log part)
plus the asymptotic expansion of H, whose neglected term is below 1e-40 once
m exceeds DIRECT.
"""

import math
from functools import lru_cache

import mpmath
import numpy as np

DIRECT = 1 << 16
EULER_GAMMA = 0.57721566490153286061

_m = np.arange(1, DIRECT + 1, dtype=float)
_H = np.cumsum(1.0 / _m)


def harmonic(n):
    """H(n) = 1 + 1/2 + ... + 1/n, with H(0) = 0."""
    n = int(n)
    if n <= 0:
        return 0.0
    if n <= DIRECT:
        return float(_H[n - 1])
    with mpmath.workdps(30):
        return float(mpmath.digamma(n + 1) + mpmath.euler)


def _near_one(p):
    return abs(p - 1.0) < 1e-12


@lru_cache(maxsize=None)
def _zeta(p, a, derivative):
    # Hurwitz zeta; a pole at p = 1 is stepped around by a tiny offset
    # whose effect on the differences we take is far below double precision.
    if _near_one(p):
        with mpmath.workdps(110):
            return mpmath.zeta(mpmath.mpf(1) + mpmath.mpf("1e-40"), a, derivative)
    with mpmath.workdps(40):
        return mpmath.zeta(mpmath.mpf(p), a, derivative)


def _zeta_diff(p, a, b, derivative=0):
    """sum_{m=a}^{b} m^-p (derivative 0) or -sum m^-p ln m (derivative 1)."""
    dps = 110 if _near_one(p) else 40
    with mpmath.workdps(dps):
        return _zeta(p, a, derivative) - _zeta(p, b + 1, derivative)


def power_sum(p, a, b):
    """sum_{m=a}^{b} m^-p for integers 1 <= a."""
    a, b = int(a), int(b)
    if b < a:
        return 0.0
    total = 0.0
    if a <= DIRECT:
        hi = min(b, DIRECT)
        total += math.fsum((_m[a - 1 : hi] ** -p).tolist())
        a = hi + 1
    if a <= b:
        total += float(_zeta_diff(p, a, b))
    return total


def power_harmonic_sum(p, a, b):
    """sum_{m=a}^{b} m^-p H(m)."""
    a, b = int(a), int(b)
    if b < a:
        return 0.0
    total = 0.0
    if a <= DIRECT:
        hi = min(b, DIRECT)
        total += math.fsum((_m[a - 1 : hi] ** -p * _H[a - 1 : hi]).tolist())
        a = hi + 1
    if a <= b:
        dps = 110 if _near_one(p) else 40
        with mpmath.workdps(dps):
            acc = -_zeta_diff(p, a, b, 1) + mpmath.mpf(EULER_GAMMA) * _zeta_diff(p, a, b)
            for c, k in ((0.5, 1), (-1 / 12, 2), (1 / 120, 4), (-1 / 252, 6)):
                acc += c * _zeta_diff(p + k, a, b)
            total += float(acc)
    return total


def term_sum(terms, a, b):
    """Sum of coef * m^-p * (H(m) if flag else 1) over m in [a, b] for each term."""
    parts = []
    for coef, p, with_h in terms:
        if coef == 0:
            continue
        s = power_harmonic_sum(p, a, b) if with_h else power_sum(p, a, b)
        parts.append(coef * s)
    return math.fsum(parts)


class CappedReciprocal:
    """f(k) = min(1/k, cap) for k >= 1 and its partial sums F(m) = f(1)+...+f(m).

    ``switch`` is the last k where the cap is active, floor(1/cap), supplied
    exactly by the caller.
    """

    def __init__(self, cap, switch):
        self.cap = float(cap)
        self.switch = int(switch)
        self._offset = self.cap * self.switch - harmonic(self.switch)

    def value_terms(self, lo, hi):
        """Pieces of f on [lo, hi] as (coef, power_shift, with_h) lists, split at the switch."""
        out = []
        if lo <= self.switch:
            out.append((lo, min(hi, self.switch), [(self.cap, 0, False)]))
        if hi > self.switch:
            out.append((max(lo, self.switch + 1), hi, [(1.0, 1, False)]))
        return out

    def partial_terms(self, lo, hi, shift=0):
        """Pieces of F(m - shift) on [lo, hi] (shift is 0 or 1)."""
        out = []
        edge = self.switch + shift
        if lo <= edge:
            seg = [(self.cap, -1, False)]
            if shift:
                seg.append((-self.cap * shift, 0, False))
            out.append((lo, min(hi, edge), seg))
        if hi > edge:
            seg = [(self._offset, 0, False), (1.0, 0, True)]
            if shift:
                seg.append((-1.0, 1, False))
            out.append((max(lo, edge + 1), hi, seg))
        return out

    def values(self, k):
        k = np.asarray(k, dtype=float)
        return np.minimum(1.0 / k, self.cap)


def _product(left, right):
    """Multiply two piece lists, intersecting their ranges."""
    out = []
    for lo1, hi1, t1 in left:
        for lo2, hi2, t2 in right:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if lo > hi:
                continue
            terms = []
            for c1, p1, h1 in t1:
                for c2, p2, h2 in t2:
                    terms.append((c1 * c2, p1 + p2, h1 or h2))
            out.append((lo, hi, terms))
    return out


def weighted_sum(s, factor_pieces, lo, hi):
    """sum_{m=lo}^{hi} m^-s * (product of the factors), factors given as piece lists."""
    pieces = [(lo, hi, [(1.0, s, False)])]
    for fp in factor_pieces:
        pieces = _product(pieces, fp)
    return math.fsum(term_sum(terms, a, b) for a, b, terms in pieces)
