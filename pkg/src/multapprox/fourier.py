"""Fourier coefficients of the dyadic rectangle families and the lattice sums
that bound the measure of A_q.

Conventions: e(x) = exp(2 pi i x); frequencies are integer pairs; the
periodized family is the function counting how many cell translates of
R_{q,j} contain a point, whose coefficients factor through one cell.
"""

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import lambertw

from . import lattice
from .errors import BudgetExceeded, DomainError
from .geometry import DyadicRectangleFamily, dyadic_index_range


@dataclass(frozen=True)
class FrequencyVector:
    n1: int
    n2: int

    def __iter__(self):
        return iter((self.n1, self.n2))

    def __neg__(self):
        return FrequencyVector(-self.n1, -self.n2)

    @property
    def sup_norm(self):
        return max(abs(self.n1), abs(self.n2))


def _freq(n):
    if isinstance(n, FrequencyVector):
        return n
    n1, n2 = n
    return FrequencyVector(int(n1), int(n2))


@dataclass(frozen=True)
class BoundParameters:
    s: float
    epsilon: float
    Kmax: int = None
    Nmax: int = None

    def __post_init__(self):
        if not 0 < self.epsilon < self.s <= 1:
            raise DomainError(f"need 0 < epsilon < s <= 1, got s={self.s}, epsilon={self.epsilon}")


def oscillatory_integral(eta, n):
    """Integral of e(n x) over [-eta, eta]."""
    if eta <= 0:
        raise DomainError(f"eta must be positive, got {eta}")
    if n == 0:
        return 2.0 * eta
    return math.sin(2 * math.pi * n * eta) / (math.pi * n)


def _oscillatory_array(eta, n):
    n = np.asarray(n, dtype=float)
    safe = np.where(n == 0, 1.0, n)
    return np.where(n == 0, 2.0 * eta, np.sin(2 * np.pi * n * eta) / (np.pi * safe))


def _family(q, j, psi_q):
    rng = dyadic_index_range(q, psi_q)
    if j not in rng:
        raise DomainError(f"j = {j} outside I_q = [{rng.j_lo}, {rng.j_hi}]")
    return DyadicRectangleFamily(q, j, psi_q)


def rect_fourier_coeff(q, j, psi_q, n):
    """c_{q,j}(n): zero unless q divides both components, else q^2 times one cell's transform."""
    n1, n2 = _freq(n)
    fam = _family(q, j, psi_q)
    if n1 % q or n2 % q:
        return 0.0
    return q * q * oscillatory_integral(fam.halfwidth1, -n1) * oscillatory_integral(fam.halfwidth2, -n2)


def coeff_bound(q, j, psi_q, n):
    """q^2 min(1/|n1|, 2^-j) min(1/|n2|, psi / (q^2 2^-j)), with 1/0 read as infinity."""
    n1, n2 = _freq(n)
    _family(q, j, psi_q)
    if n1 % q or n2 % q:
        raise DomainError("coeff_bound needs q | n")
    cap1 = 2.0**-j
    cap2 = psi_q / (q * q * 2.0**-j)
    f1 = cap1 if n1 == 0 else min(1.0 / abs(n1), cap1)
    f2 = cap2 if n2 == 0 else min(1.0 / abs(n2), cap2)
    return q * q * f1 * f2


def periodized_cell_sum(q, j, psi_q, x1, x2):
    """How many translates of the level-j cells contain each point."""
    return _family(q, j, psi_q).cell_count(x1, x2)


class EmpiricalMeasure:
    """A probability measure with finitely many atoms on the torus."""

    def __init__(self, points, weights=None):
        pts = np.mod(np.asarray(points, dtype=float).reshape(-1, 2), 1.0)
        if len(pts) == 0:
            raise DomainError("an empirical measure needs at least one atom")
        if weights is None:
            w = np.full(len(pts), 1.0 / len(pts))
        else:
            w = np.asarray(weights, dtype=float)
            if w.shape != (len(pts),) or np.any(w <= 0):
                raise DomainError("weights must be positive, one per atom")
            w = w / math.fsum(w.tolist())
        self.points = pts
        self.weights = w

    @classmethod
    def from_atoms(cls, atoms):
        """From (point, weight) pairs; points may be TorusPoint2 or pairs."""
        pts = [tuple(float(c) for c in p) for p, _ in atoms]
        return cls(pts, [w for _, w in atoms])

    @classmethod
    def dirac(cls, x1, x2):
        return cls([(x1, x2)])

    @classmethod
    def grid(cls, m):
        i = np.arange(m) / m
        g1, g2 = np.meshgrid(i, i, indexing="ij")
        return cls(np.column_stack([g1.ravel(), g2.ravel()]))

    def transform(self, xi):
        """mu^(xi) = sum_i w_i e(-xi . x_i)."""
        n1, n2 = _freq(xi)
        phase = -2 * np.pi * (n1 * self.points[:, 0] + n2 * self.points[:, 1])
        re = math.fsum((self.weights * np.cos(phase)).tolist())
        im = math.fsum((self.weights * np.sin(phase)).tolist())
        return complex(re, im)


class LebesgueMeasure:
    """Haar measure on the torus: its transform is the indicator of xi = 0."""

    def transform(self, xi):
        n1, n2 = _freq(xi)
        return 1.0 + 0j if n1 == 0 and n2 == 0 else 0j


def empirical_fourier_transform(mu, xi):
    return mu.transform(xi)


@dataclass
class MeasureEstimate:
    value: float
    nmax: int
    smoothing: str
    terms: int

    def to_dict(self):
        return asdict(self)


def _weights(nmax, smoothing):
    k = np.arange(-nmax, nmax + 1)
    if smoothing == "none":
        return k, np.ones(k.size)
    if smoothing == "cesaro":
        return k, 1.0 - np.abs(k) / (nmax + 1)
    raise DomainError(f"unknown smoothing {smoothing!r}")


def measure_of_family(mu, q, j, psi_q, nmax, smoothing="none", budget=10**7):
    """Truncated sum of c_{q,j}(qk) mu^(-qk) over |k1|, |k2| <= nmax.

    Lebesgue measure keeps only the zero frequency. For atomic measures the
    double sum factorizes atom by atom into two one-dimensional sums; any
    other measure exposing ``transform`` is summed term by term.
    """
    if nmax < 0:
        raise DomainError("nmax must be non-negative")
    fam = _family(q, j, psi_q)
    if isinstance(mu, LebesgueMeasure):
        return MeasureEstimate(rect_fourier_coeff(q, j, psi_q, (0, 0)), nmax, smoothing, 1)
    k, w = _weights(nmax, smoothing)
    a1 = q * w * _oscillatory_array(fam.halfwidth1, q * k)
    a2 = q * w * _oscillatory_array(fam.halfwidth2, q * k)
    if isinstance(mu, EmpiricalMeasure):
        # c(qk) is even in each component, so each factor is a cosine sum.
        ph1 = np.cos(2 * np.pi * q * np.outer(mu.points[:, 0], k))
        ph2 = np.cos(2 * np.pi * q * np.outer(mu.points[:, 1], k))
        s1 = ph1 @ a1
        s2 = ph2 @ a2
        value = math.fsum((mu.weights * s1 * s2).tolist())
        return MeasureEstimate(value, nmax, smoothing, k.size**2)
    if k.size**2 > budget:
        raise BudgetExceeded(f"{k.size ** 2} frequencies exceed the budget of {budget}")
    parts = []
    for i1, k1 in enumerate(k.tolist()):
        for i2, k2 in enumerate(k.tolist()):
            parts.append(a1[i1] * a2[i2] * mu.transform((-q * k1, -q * k2)).real)
    return MeasureEstimate(math.fsum(parts), nmax, smoothing, len(parts))


def boundary_distance(q, j, psi_q, x1, x2):
    """Distance, in the scaled variables y = q x, from the point to the nearest cell edge,
    per coordinate."""
    fam = _family(q, j, psi_q)
    out = []
    for x, w in ((x1, fam.bound1), (x2, fam.bound2)):
        y = (q * x) % 1.0
        d = min(abs(((y - w) + 0.5) % 1.0 - 0.5), abs(((y + w) + 0.5) % 1.0 - 0.5))
        if w >= 0.5:
            d = math.inf  # constraint covers the whole circle
        out.append(d)
    return tuple(out)


def fejer_nmax(q, j, psi_q, x1, x2, tol, oscillation=2.0):
    """Fejer order guaranteeing the smoothed value at (x1, x2) is within tol of the cell sum.

    In y = q x each coordinate factor takes values in {0, 1, 2}; away from its
    jumps by d, the Fejer mean errs by at most oscillation / (2 (N+1) d). The
    product error is at most 2 e1 + 2 e2 + e1 e2, so each factor gets tol / 5.
    """
    d1, d2 = boundary_distance(q, j, psi_q, x1, x2)
    d = min(d1, d2)
    if d == 0:
        raise DomainError("point lies on a cell edge; Fejer means converge to the midpoint there")
    if math.isinf(d):
        return 0
    each = tol / 5.0
    return max(1, math.ceil(oscillation / (2 * d * each)) - 1)


# lattice sums bounding mu(A_q)


def S_term(j, k, q, psi_q, s):
    """min(1/k1, q 2^-j) min(1/k2, psi 2^j / q) q^-s min(k1^-s, k2^-s), with S(j, 0) = psi."""
    k1, k2 = _freq(k)
    if k1 < 0 or k2 < 0:
        raise DomainError("S_term takes k in N^2")
    if k1 == 0 and k2 == 0:
        return float(psi_q)
    cap1 = q * 2.0**-j
    cap2 = psi_q * 2.0**j / q
    f1 = cap1 if k1 == 0 else min(1.0 / k1, cap1)
    f2 = cap2 if k2 == 0 else min(1.0 / k2, cap2)
    return f1 * f2 * q**-s * max(k1, k2) ** -s


@dataclass
class LatticeParts:
    q: int
    psi_q: float
    s: float
    kmax: int
    levels: int
    omega0: float
    omega1: float
    omega2: float
    t11: float
    t12: float
    t21: float
    t22: float
    total: float
    tail_estimate: float
    method: str
    per_level: list = field(default_factory=list, repr=False)

    @property
    def parts_sum(self):
        return math.fsum([self.omega0, self.omega1, self.omega2, self.t11, self.t12, self.t21, self.t22])

    @property
    def omega3(self):
        return math.fsum([self.t11, self.t12, self.t21, self.t22])

    @property
    def signed_total(self):
        """Sum over all of Z^2 of S(j, |k|): axes count twice, the open quadrant four times."""
        return math.fsum([self.omega0, 2 * self.omega1, 2 * self.omega2, 4 * self.omega3])

    def to_dict(self):
        d = asdict(self)
        d.pop("per_level")
        d.update(parts_sum=self.parts_sum, signed_total=self.signed_total)
        return d


def default_kmax(q, psi_q):
    return 4 * math.ceil(Fraction(q) / Fraction(psi_q))


def in_first_range(q, j, psi_q):
    """True for 2^j < q / sqrt(psi), i.e. where the first cap q 2^-j exceeds the second."""
    return Fraction(q) ** 2 > Fraction(psi_q) * 4**j


def _level_caps(q, j, psi_q):
    cap1 = q * 2.0**-j
    cap2 = psi_q * 2.0**j / q
    sw1 = 2**j // q
    sw2 = math.floor(Fraction(q) / (Fraction(psi_q) * 2**j))
    return cap1, cap2, sw1, sw2


def _level_analytic(q, j, psi_q, s, kmax):
    cap1, cap2, sw1, sw2 = _level_caps(q, j, psi_q)
    f1 = lattice.CappedReciprocal(cap1, sw1)
    f2 = lattice.CappedReciprocal(cap2, sw2)
    qs = float(q) ** -s
    ws = lattice.weighted_sum
    K = kmax
    omega1 = qs * cap1 * ws(s, [f2.value_terms(1, K)], 1, K)
    omega2 = qs * cap2 * ws(s, [f1.value_terms(1, K)], 1, K)
    # k1 <= k2, grouped by m = k2
    upper = qs * ws(s, [f2.value_terms(1, K), f1.partial_terms(1, K)], 1, K)
    # k1 > k2, grouped by m = k1
    lower = qs * ws(s, [f1.value_terms(1, K), f2.partial_terms(1, K, shift=1)], 1, K)
    # the same total regrouped: row k1 = m with 0 <= k2 <= m, column k2 = m with 0 <= k1 < m
    row = ws(s, [f1.value_terms(1, K), f2.partial_terms(1, K) + [(1, K, [(cap2, 0, False)])]], 1, K)
    col = ws(s, [f2.value_terms(1, K), f1.partial_terms(1, K, shift=1) + [(1, K, [(cap1, 0, False)])]], 1, K)
    total = math.fsum([psi_q, qs * row, qs * col])
    # integral-test bound on everything with max(k1, k2) > K
    c = cap1 + cap2 + f1._offset + f2._offset + 2.0
    tail = qs * (c * K**-s / s + 2 * K**-s * (s * math.log(K) + 1) / s**2)
    return dict(omega1=omega1, omega2=omega2, upper=upper, lower=lower, total=total, tail=tail)


def _level_direct(q, j, psi_q, s, kmax):
    cap1, cap2, _, _ = _level_caps(q, j, psi_q)
    k = np.arange(kmax + 1, dtype=float)
    kk = np.where(k == 0, 1.0, k)
    f1 = np.where(k == 0, cap1, np.minimum(1.0 / kk, cap1))
    f2 = np.where(k == 0, cap2, np.minimum(1.0 / kk, cap2))
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    m = np.maximum(k1, k2)
    m[0, 0] = 1.0
    S = np.outer(f1, f2) * float(q) ** -s * m**-s
    S[0, 0] = psi_q
    upper = np.triu(np.ones_like(S, dtype=bool))  # k1 <= k2
    inner = (k1 >= 1) & (k2 >= 1)
    return dict(
        omega1=math.fsum(S[0, 1:].tolist()),
        omega2=math.fsum(S[1:, 0].tolist()),
        upper=math.fsum(S[inner & upper].tolist()),
        lower=math.fsum(S[inner & ~upper].tolist()),
        total=math.fsum(S.ravel().tolist()),
        tail=math.nan,
    )


def lemma33_lhs(q, psi, s, kmax=None, method="analytic", budget=5 * 10**7):
    """Sum of S(j, k) over j in I_q and k in [0, kmax]^2, split into its parts.

    omega0 collects k = 0, omega1 the k1 = 0 axis, omega2 the k2 = 0 axis;
    the open quadrant is split four ways: t1* over levels with 2^j < q / sqrt(psi),
    t2* over the rest, and t*1 over k1 <= k2, t*2 over k1 > k2. ``total`` is
    computed from a different grouping of the same terms, so comparing it with
    the sum of parts is a genuine check. ``method="direct"`` sums every lattice
    term and is limited by ``budget``.
    """
    psi_q = float(psi(q)) if callable(psi) else float(psi)
    if not 0 < s <= 1:
        raise DomainError(f"s must lie in (0, 1], got {s}")
    rng = dyadic_index_range(q, psi_q)
    kmax = default_kmax(q, psi_q) if kmax is None else int(kmax)
    if kmax < 1:
        raise DomainError("kmax must be at least 1")
    if method == "direct":
        terms = len(rng) * (kmax + 1) ** 2
        if terms > budget:
            raise BudgetExceeded(f"{terms} lattice terms exceed the budget of {budget}")
        level = _level_direct
    elif method == "analytic":
        level = _level_analytic
    else:
        raise DomainError(f"unknown method {method!r}")
    acc = {key: [] for key in ("omega1", "omega2", "t11", "t12", "t21", "t22", "total", "tail")}
    rows = []
    for j in rng:
        r = level(q, j, psi_q, s, kmax)
        u = 1 if in_first_range(q, j, psi_q) else 2
        acc["omega1"].append(r["omega1"])
        acc["omega2"].append(r["omega2"])
        acc[f"t{u}1"].append(r["upper"])
        acc[f"t{u}2"].append(r["lower"])
        acc["total"].append(r["total"])
        acc["tail"].append(r["tail"])
        rows.append(dict(j=j, range=u, **r))
    f = {key: math.fsum(v) for key, v in acc.items()}
    return LatticeParts(
        q=q,
        psi_q=psi_q,
        s=s,
        kmax=kmax,
        levels=len(rng),
        omega0=len(rng) * psi_q,
        omega1=f["omega1"],
        omega2=f["omega2"],
        t11=f["t11"],
        t12=f["t12"],
        t21=f["t21"],
        t22=f["t22"],
        total=f["total"],
        tail_estimate=f["tail"],
        method=method,
        per_level=rows,
    )


def lemma33_rhs(q, psi_q, s, epsilon):
    """psi log(1/psi) + q^-(s - eps) psi^((s - eps)/2)."""
    if not 0 < epsilon < s:
        raise DomainError(f"need 0 < epsilon < s, got s={s}, epsilon={epsilon}")
    if not 0 < psi_q < 1:
        raise DomainError(f"psi(q) must lie in (0, 1), got {psi_q}")
    e = s - epsilon
    return psi_q * math.log(1 / psi_q) + q**-e * psi_q ** (e / 2)


def log_power_crossover(epsilon):
    """psi0 such that (1/psi)^eps > log(1/psi) for all 0 < psi < psi0.

    With y = log(1/psi) the inequality reads exp(eps y) > y, whose larger root
    is -W_{-1}(-eps)/eps (Lambert W, lower branch).
    """
    if not 0 < epsilon < 1 / math.e:
        raise DomainError("epsilon must lie in (0, 1/e)")
    y0 = float((-lambertw(-epsilon, -1) / epsilon).real)
    return math.exp(-y0)


def loglog_slope(xs, ys):
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def lemma33_certified(q, psi, s, rtol=1e-6, max_steps=12):
    """lemma33_lhs with kmax raised (by factors of 2^8) until the tail bound is below rtol * total.

    For small s the tail beyond the default truncation decays only like
    kmax^-s, so the default can leave a sizeable part of the full lattice sum
    uncounted.
    """
    psi_q = float(psi(q)) if callable(psi) else float(psi)
    kmax = default_kmax(q, psi_q)
    for _ in range(max_steps):
        res = lemma33_lhs(q, psi_q, s, kmax)
        if res.tail_estimate <= rtol * res.total:
            return res
        kmax <<= 8
    raise BudgetExceeded(f"tail bound still above {rtol} of the total at kmax = {kmax}")
