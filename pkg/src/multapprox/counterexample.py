"""A divergent approximation function whose well-approximable set is thin.

Level k picks consecutive primes above N_{k-1} until their reciprocals sum
past a threshold theta_k, sets N_k to their product and puts
psi_k(q) = q / (2^k N_k) on the divisors of N_k. Hitting ||q x|| < psi_k(q)
for a divisor q forces ||N_k x|| < 2^-k, so every psi-approximable point is
controlled by the sparse sequence N_k.

Thresholds are exact rationals. In ``exact`` mode theta_k = 2^k; ``scaled``
mode takes them from a list, where "c/N" means c / N_{k-1}.
"""

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import mpmath

from .approx import ApproxFunction, format_rational, parse_rational
from .errors import BudgetExceeded, DomainError
from .primes import primes_above

DEFAULT_SCALED_THETAS = ("1", "12/N", "12/N", "12/N")
SUMMARY_PRIMES = 16


def int_to_str(n):
    """Decimal string of an integer of any size."""
    return gmpy2.mpz(n).digits(10)


def str_to_int(text):
    return int(gmpy2.mpz(str(text)))


def decimal_digits(n):
    return len(int_to_str(abs(n)))


def parse_theta(text, n_prev):
    """A threshold: a rational like "3/2", or "c/N" for c / N_{k-1}."""
    text = str(text).strip()
    if text.endswith("/N"):
        return parse_rational(text[:-2]) / n_prev
    return parse_rational(text)


@dataclass(frozen=True)
class LevelData:
    k: int
    primes: tuple
    N: int
    threshold: Fraction

    def __post_init__(self):
        object.__setattr__(self, "primes", tuple(int(p) for p in self.primes))
        if math.prod(self.primes) != self.N:
            raise DomainError(f"level {self.k}: N is not the product of its primes")

    @property
    def reciprocal_sum(self):
        return sum((Fraction(1, p) for p in self.primes), Fraction(0))

    def psi(self, q):
        """psi_k(q) = q / (2^k N) if q divides N, else 0."""
        if q < 1 or self.N % q:
            return Fraction(0)
        return Fraction(q, 2**self.k * self.N)

    def to_dict(self):
        return {
            "k": self.k,
            "primes": [int_to_str(p) for p in self.primes],
            "N": int_to_str(self.N),
            "threshold": format_rational(self.threshold),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            int(d["k"]),
            tuple(str_to_int(p) for p in d["primes"]),
            str_to_int(d["N"]),
            parse_rational(d["threshold"]),
        )

    def summary(self):
        """Compact description: full prime list when short, else count and endpoints."""
        nd = decimal_digits(self.N)
        out = {
            "k": self.k,
            "prime_count": len(self.primes),
            "N_digits": nd,
            "threshold": format_rational(self.threshold) if decimal_digits(self.threshold.denominator) < 200 else None,
            "reciprocal_sum_exceeds_threshold": self.reciprocal_sum > self.threshold,
        }
        top = decimal_digits(self.primes[-1])
        if len(self.primes) <= SUMMARY_PRIMES and top <= 40:
            out["primes"] = [str(p) for p in self.primes]
        else:
            out["smallest_prime_digits"] = decimal_digits(self.primes[0])
            out["largest_prime_digits"] = top
            if top <= 40:
                out["smallest_prime"] = str(self.primes[0])
                out["largest_prime"] = str(self.primes[-1])
        return out


@dataclass
class ConstructionConfig:
    levels: int = 1
    mode: str = "exact"
    thetas: list = field(default_factory=list)
    prime_budget: int = 10**7

    def __post_init__(self):
        if self.levels < 1:
            raise DomainError("levels must be at least 1")
        if self.mode not in ("exact", "scaled"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.mode == "scaled":
            if not self.thetas:
                self.thetas = list(DEFAULT_SCALED_THETAS[: self.levels])
            if len(self.thetas) < self.levels:
                raise DomainError("scaled mode needs one threshold per level")
        if self.prime_budget < 1:
            raise DomainError("prime_budget must be positive")

    def threshold(self, k, n_prev):
        if self.mode == "exact":
            return Fraction(2**k)
        theta = parse_theta(self.thetas[k - 1], n_prev)
        if theta <= 0:
            raise DomainError(f"threshold for level {k} must be positive")
        return theta

    def to_dict(self):
        return {
            "levels": self.levels,
            "mode": self.mode,
            "thetas": [str(t) for t in self.thetas],
            "prime_budget": self.prime_budget,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def select_level_primes(k, n_prev, theta, budget=10**7):
    """Shortest run of consecutive primes above n_prev with sum of 1/p strictly above theta.

    Raises BudgetExceeded once the primes would pass n_prev + budget, or as
    soon as even every integer left in that window could not close the gap.
    """
    theta = Fraction(theta)
    if theta < 0:
        raise DomainError("theta must be non-negative")
    limit = n_prev + budget + 1
    total = Fraction(0)
    chosen = []
    for p in primes_above(n_prev, limit):
        chosen.append(p)
        total += Fraction(1, p)
        if total > theta:
            return chosen
        # crude ceiling on what the rest of the window can contribute
        if total + Fraction(limit - p, p + 1) <= theta:
            break
    raise BudgetExceeded(
        f"level {k}: primes in ({n_prev}, {n_prev + budget}] cannot push the reciprocal sum past {float(theta):.6g}"
    )


@dataclass
class Construction:
    config: ConstructionConfig
    levels: list

    @property
    def psi(self):
        return ApproxFunction.from_levels(self.levels)


def build_construction(cfg):
    levels = []
    n_prev = 1
    for k in range(1, cfg.levels + 1):
        theta = cfg.threshold(k, n_prev)
        primes = select_level_primes(k, n_prev, theta, cfg.prime_budget)
        n = math.prod(primes)
        levels.append(LevelData(k, tuple(primes), n, theta))
        n_prev = n
    return Construction(cfg, levels)


def verify_divergence(levels):
    """Per level, the exact sum of psi_k(N/p) over its primes, i.e. sum 1/(2^k p)."""
    rows = []
    for lv in levels:
        s = lv.reciprocal_sum / 2**lv.k
        target = lv.threshold / 2**lv.k
        rows.append({
            "k": lv.k,
            "sum": s,
            "target": target,
            "exceeds_target": s > target,
            "exceeds_one": s > 1,
        })
    return rows


def check_chaining(levels):
    """Every prime of level k exceeds N_{k-1}."""
    prev = 1
    for lv in levels:
        if min(lv.primes) <= prev:
            return False
        prev = lv.N
    return True


def support_khintchine_sum(levels):
    """sum over k and p of psi(N_k / p), psi summed over all levels."""
    psi = ApproxFunction.from_levels(levels)
    return sum((psi.exact(lv.N // p) for lv in levels for p in lv.primes), Fraction(0))


def _dist_num(num, den):
    """||num/den|| * den as an integer, den > 0."""
    r = num % den
    return min(r, den - r)


def transfer_divisors(level, extra=32, rng=None):
    """{N/p} plus 1 and N, plus ``extra`` products of random prime subsets."""
    divs = {1, level.N}
    divs.update(level.N // p for p in level.primes)
    rng = rng or random.Random(0)
    for _ in range(extra):
        sub = [p for p in level.primes if rng.random() < 0.5]
        divs.add(math.prod(sub))
    return sorted(divs)


@dataclass
class TransferReport:
    samples: int
    pairs: int
    premises: int
    violations: int
    witnesses: list

    @property
    def holds(self):
        return self.violations == 0

    def to_dict(self):
        return {
            "samples": self.samples,
            "pairs": self.pairs,
            "premises": self.premises,
            "violations": self.violations,
            "holds": self.holds,
        }


def verify_transfer(level, samples, divisors=None, rng=None):
    """Check ||q x|| < psi_k(q) implies ||N x|| < 2^-k on rational samples, exactly.

    Both sides are compared as integer inequalities after clearing the
    denominator of x, so there is no rounding anywhere.
    """
    divs = divisors if divisors is not None else transfer_divisors(level, rng=rng)
    divs = [gmpy2.mpz(q) for q in divs]
    n = gmpy2.mpz(level.N)
    scale = gmpy2.mpz(2) ** level.k
    big = scale * n
    pairs = premises = violations = 0
    witnesses = []
    for x in samples:
        x = Fraction(x)
        a, b = gmpy2.mpz(x.numerator), gmpy2.mpz(x.denominator)
        conclusion = _dist_num(n * a, b) * scale < b
        for q in divs:
            pairs += 1
            # ||q x|| < q / (2^k N)  <=>  dist * 2^k N < q b
            if _dist_num(q * a, b) * big < q * b:
                premises += 1
                if not conclusion:
                    violations += 1
                    witnesses.append((x, int(q)))
    return TransferReport(len(samples), pairs, premises, violations, witnesses[:10])


def adversarial_samples(level, count, rng=None, gap=10**6):
    """Points x = a/q +- (psi_k(q) - delta)/q with delta = psi_k(q)/gap, just inside the premise."""
    rng = rng or random.Random(0)
    divs = transfer_divisors(level, rng=rng)
    den = gmpy2.mpz(gap) * 2**level.k * level.N
    out = []
    for _ in range(count):
        q = rng.choice(divs)
        a = rng.randrange(q)
        sign = 1 if rng.random() < 0.5 else -1
        # a/q + sign (psi - delta)/q over the common denominator gap 2^k N
        num = a * (den // q) + sign * (gap - 1)
        out.append(Fraction(int(num), int(den)))
    return out


def random_rationals(count, max_den, rng=None):
    rng = rng or random.Random(0)
    out = []
    for _ in range(count):
        b = rng.randint(1, max_den)
        out.append(Fraction(rng.randrange(b), b))
    return out


def envelope_series(levels, s):
    """Partial sums of sum_k (2^-k / N_k)^s; terms go through mpmath so none underflow."""
    if not s > 0:
        raise DomainError("s must be positive")
    total = mpmath.mpf(0)
    out = []
    with mpmath.workdps(30):
        for lv in levels:
            log_term = -s * (lv.k * math.log(2) + math.log(lv.N))
            total += mpmath.exp(log_term)
            out.append(float(total))
    return out


def stable_digits(partials):
    """Significant digits on which the last two partial sums agree."""
    if len(partials) < 2:
        return 0
    a, b = partials[-2], partials[-1]
    if a == b:
        return 17
    return max(0, int(math.floor(-math.log10(abs(b - a) / abs(b)))))
