"""Star domains A_q, their dyadic rectangle coverings and cell geometry.

All sets live on the torus [0, 1)^2: containment wraps mod 1 and areas are
computed without clipping.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .approx import nearest_integer_distance
from .errors import DomainError

QUARTER = 0.25


def _check_psi(psi_q):
    if not 0 < psi_q < QUARTER:
        raise DomainError(f"psi(q) must lie in (0, 1/4), got {psi_q!r}")


def _check_q(q):
    if int(q) != q or q < 1:
        raise DomainError(f"q must be a positive integer, got {q!r}")


@dataclass(frozen=True)
class IndexRange:
    """Dyadic levels j with 2q <= 2^j <= q/psi(q)."""

    j_lo: int
    j_hi: int

    def __iter__(self):
        return iter(range(self.j_lo, self.j_hi + 1))

    def __len__(self):
        return self.j_hi - self.j_lo + 1

    def __contains__(self, j):
        return self.j_lo <= j <= self.j_hi


def dyadic_index_range(q, psi_q):
    """Exact endpoints of I_q = {j : 2q <= 2^j <= q/psi}."""
    _check_q(q)
    _check_psi(psi_q)
    j_lo = (2 * q - 1).bit_length()  # least j with 2^j >= 2q
    ratio = Fraction(q) / Fraction(psi_q)
    j_hi = math.floor(ratio).bit_length() - 1  # largest j with 2^j <= q/psi
    return IndexRange(j_lo, j_hi)


def star_measure(psi_q):
    """Lebesgue measure of {x in T^2 : ||q x1|| ||q x2|| < psi}, the same for every q."""
    _check_psi(psi_q)
    return 4.0 * psi_q * (1.0 + math.log(1.0 / (4.0 * psi_q)))


@dataclass(frozen=True)
class StarDomain:
    """A_q: the q^2 star-shaped regions ||q x1|| ||q x2|| < psi around (a/q, b/q)."""

    q: int
    psi_q: float

    def __post_init__(self):
        _check_q(self.q)
        _check_psi(self.psi_q)

    def contains(self, x1, x2):
        d1 = nearest_integer_distance(self.q * np.asarray(x1, dtype=float))
        d2 = nearest_integer_distance(self.q * np.asarray(x2, dtype=float))
        return d1 * d2 < self.psi_q

    @property
    def measure(self):
        return star_measure(self.psi_q)

    def sample(self, n, rng):
        """n points drawn uniformly from A_q.

        ||q x1|| is drawn from its marginal on A_q by inverting the closed-form
        CDF, then x2 uniformly from the admissible strip. Rounding casualties
        are rejected against the predicate and redrawn.
        """
        q, psi = self.q, self.psi_q
        xs1, xs2 = [], []
        need = n
        while need > 0:
            m = need + need // 16 + 8
            # marginal of u = ||q x1|| on [0, 1/2]: density ~ min(1, 2 psi / u)
            total = 2 * psi * (1 + math.log(1 / (4 * psi)))
            r = rng.random(m) * total
            u = np.where(r <= 2 * psi, r, 2 * psi * np.exp((r - 2 * psi) / (2 * psi)))
            u = np.minimum(u, 0.5)
            vmax = np.minimum(0.5, psi / np.maximum(u, 1e-300))
            v = rng.random(m) * vmax
            a = rng.integers(0, q, m)
            b = rng.integers(0, q, m)
            s1 = np.where(rng.random(m) < 0.5, -1.0, 1.0)
            s2 = np.where(rng.random(m) < 0.5, -1.0, 1.0)
            x1 = np.mod((a + s1 * u) / q, 1.0)
            x2 = np.mod((b + s2 * v) / q, 1.0)
            ok = self.contains(x1, x2)
            xs1.append(x1[ok][:need])
            xs2.append(x2[ok][:need])
            need -= int(min(ok.sum(), need))
        return np.concatenate(xs1), np.concatenate(xs2)


def _count_integers_within(y, w):
    """#{m in Z : |y - m| < w} for arrays y and a scalar w >= 0."""
    return np.ceil(y + w) - np.floor(y - w) - 1


@dataclass(frozen=True)
class CellRectangle:
    """R_{q,j}(a, b): |x1 - a/q| < 2^-(j-1), |x2 - b/q| < psi / (q^2 2^-j), on the torus."""

    q: int
    j: int
    a: int
    b: int
    psi_q: float

    @property
    def center(self):
        return (self.a / self.q, self.b / self.q)

    @property
    def halfwidths(self):
        return (2.0 ** -(self.j - 1), self.psi_q * 2.0**self.j / self.q**2)

    @property
    def area(self):
        h1, h2 = self.halfwidths
        return 4 * h1 * h2

    def contains(self, x1, x2):
        c1, c2 = self.center
        h1, h2 = self.halfwidths
        d1 = nearest_integer_distance(np.asarray(x1, dtype=float) - c1)
        d2 = nearest_integer_distance(np.asarray(x2, dtype=float) - c2)
        return (d1 < h1) & (d2 < h2)


@dataclass(frozen=True)
class DyadicRectangleFamily:
    """R_{q,j}: ||q x1|| < q 2^-(j-1) and ||q x2|| < psi / (q 2^-j)."""

    q: int
    j: int
    psi_q: float

    @property
    def halfwidth1(self):
        return 2.0 ** -(self.j - 1)

    @property
    def halfwidth2(self):
        return self.psi_q * 2.0**self.j / self.q**2

    @property
    def bound1(self):
        """Threshold on ||q x1||."""
        return self.q * self.halfwidth1

    @property
    def bound2(self):
        """Threshold on ||q x2||."""
        return self.psi_q * 2.0**self.j / self.q

    @property
    def x2_nontrivial(self):
        """True when the x2 constraint excludes something (threshold < 1/2)."""
        return self.bound2 < 0.5

    @property
    def periodized_mass(self):
        return self.q**2 * 4 * self.halfwidth1 * self.halfwidth2

    def cell(self, a, b):
        return CellRectangle(self.q, self.j, a % self.q, b % self.q, self.psi_q)

    def contains(self, x1, x2):
        """Indicator of the union of the q^2 cells."""
        d1 = nearest_integer_distance(self.q * np.asarray(x1, dtype=float))
        d2 = nearest_integer_distance(self.q * np.asarray(x2, dtype=float))
        return (d1 < self.bound1) & (d2 < self.bound2)

    def cell_count(self, x1, x2):
        """Periodized cell sum: how many cell translates contain the point."""
        y1 = self.q * np.asarray(x1, dtype=float)
        y2 = self.q * np.asarray(x2, dtype=float)
        n1 = _count_integers_within(y1, self.bound1)
        n2 = _count_integers_within(y2, self.bound2)
        return n1 * n2


def covering_family(q, psi_q):
    """The families R_{q,j}, j in I_q, whose union contains A_q."""
    rng_j = dyadic_index_range(q, psi_q)
    return [DyadicRectangleFamily(q, j, psi_q) for j in rng_j]


def covered(q, psi_q, x1, x2):
    """Whether each point lies in some R_{q,j}, j in I_q."""
    out = np.zeros(np.shape(x1), dtype=bool)
    for fam in covering_family(q, psi_q):
        out |= fam.contains(x1, x2)
    return out


def dyadic_shell(q, psi_q, x1):
    """The level j with q 2^-j <= ||q x1|| < q 2^-(j-1), clipped into I_q."""
    rng_j = dyadic_index_range(q, psi_q)
    u = nearest_integer_distance(q * np.asarray(x1, dtype=float))
    with np.errstate(divide="ignore"):
        j = np.ceil(np.log2(q / u))
    j = np.where(u > 0, j, rng_j.j_hi)
    return np.clip(j, rng_j.j_lo, rng_j.j_hi).astype(np.int64)


def cell_measure(q, j, psi_q):
    """Area of one cell R_{q,j}(a, b): 8 psi / q^2."""
    rng_j = dyadic_index_range(q, psi_q)
    if j not in rng_j:
        raise DomainError(f"j = {j} outside I_q = [{rng_j.j_lo}, {rng_j.j_hi}]")
    return 8.0 * psi_q / q**2


def cells_disjoint(q, j, psi_q):
    """True when the q^2 cells of level j are pairwise disjoint on the torus."""
    fam = DyadicRectangleFamily(q, j, psi_q)
    return 2 * fam.halfwidth1 <= 1.0 / q and 2 * fam.halfwidth2 <= 1.0 / q
