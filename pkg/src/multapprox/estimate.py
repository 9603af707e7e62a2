"""Sampling-based estimates: measures, limsup membership, box counts,
Borel-Cantelli series and Fourier decay of cell-supported measures.

Random streams come from ``SeededSampler``: work is cut into fixed chunks and
chunk i always draws from substream i, so results do not depend on how many
workers run the chunks.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .approx import hit_mask
from .errors import DegenerateFit, DomainError
from .exponents import ExponentConfig, _power_series_converges, gallagher_terms, series_converges
from .fourier import _oscillatory_array
from .summation import chunked_fsum, parallel_map

CHUNK = 1 << 16


@dataclass(frozen=True)
class SeededSampler:
    """A random stream named by (master_seed, index path)."""

    master_seed: int
    index: tuple = ()

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        idx = self.index if isinstance(self.index, tuple) else (self.index,)
        object.__setattr__(self, "index", tuple(int(i) for i in idx))

    def substream(self, i):
        """Independent child stream number i."""
        return SeededSampler(self.master_seed, self.index + (i,))

    def generator(self):
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=self.index)
        return np.random.Generator(np.random.PCG64(ss))

    def uniform(self, n):
        """n uniform points of the torus as two arrays."""
        g = self.generator()
        pts = g.random((n, 2))
        return pts[:, 0], pts[:, 1]


@dataclass
class MCResult:
    mean: float
    stderr: float
    n: int
    hits: int

    def to_dict(self):
        return {"mean": self.mean, "stderr": self.stderr, "n": self.n, "hits": self.hits}


def _count_chunk(args):
    predicate, sampler, i, size = args
    x1, x2 = sampler.substream(i).uniform(size)
    return int(np.count_nonzero(predicate(x1, x2)))


def _chunks(n):
    sizes = [CHUNK] * (n // CHUNK)
    if n % CHUNK:
        sizes.append(n % CHUNK)
    return sizes


def monte_carlo_measure(predicate, n, sampler, threads=1):
    """Fraction of n uniform torus points satisfying a vectorized predicate(x1, x2)."""
    if n < 1:
        raise DomainError("need at least one sample")
    jobs = [(predicate, sampler, i, size) for i, size in enumerate(_chunks(n))]
    hits = sum(parallel_map(_count_chunk, jobs, threads))
    p = hits / n
    return MCResult(p, math.sqrt(p * (1 - p) / n), n, hits)


def truncated_limsup_membership(p, psi, Q, n_lo, qmax, mode="multiplicative"):
    """Whether some q in Q with n_lo <= q <= qmax hits p."""
    if n_lo > qmax:
        raise DomainError("need n_lo <= qmax")
    qs = Q.iterate(qmax)
    qs = qs[qs >= n_lo]
    return bool(np.any(hit_mask(p, psi, qs, mode)))


# box counting


@dataclass
class BoxCountResult:
    resolutions: list
    counts: list
    slope: float
    residual: float
    local_slopes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "resolutions": list(self.resolutions),
            "counts": list(self.counts),
            "slope": self.slope,
            "residual": self.residual,
            "local_slopes": list(self.local_slopes),
        }


def _min_dist(q, L):
    """min of ||q x|| over each of the L intervals [i/L, (i+1)/L]."""
    lo = q * np.arange(L) / L
    hi = q * (np.arange(L) + 1) / L
    has_int = np.floor(hi) >= np.ceil(lo)
    d = np.minimum(np.abs(lo - np.rint(lo)), np.abs(hi - np.rint(hi)))
    return np.where(has_int, 0.0, d)


def _star_boxes(q, psi_q, L):
    """Boxes of the L x L grid that meet A_q (the minimum of a product of
    separate coordinates is the product of the minima)."""
    m = _min_dist(q, L)
    return np.outer(m, m) < psi_q


class FullSquare:
    def contains(self, x1, x2):
        return np.ones(np.shape(x1), dtype=bool)


class StarUnion:
    """Union of A_q over q in Q with qmin <= q <= qmax."""

    def __init__(self, psi, Q, qmax, qmin=1):
        self.qs = Q.iterate(qmax)
        self.qs = self.qs[self.qs >= qmin]
        self.vals = psi.values(self.qs)

    def contains(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.zeros(x1.shape, dtype=bool)
        for q, v in zip(self.qs.tolist(), self.vals.tolist()):
            if v > 0:
                d1 = np.abs(q * x1 - np.rint(q * x1))
                d2 = np.abs(q * x2 - np.rint(q * x2))
                out |= d1 * d2 < v
        return out

    def probe_points(self, L):
        """Points on the star axes through each centre, one per grid column and row."""
        xs, ys = [], []
        t = (np.arange(L) + 0.5) / L
        for q in self.qs.tolist():
            if q > L:
                break
            c = np.arange(q) / q
            xs += [np.repeat(c, L), np.tile(t, q)]
            ys += [np.tile(t, q), np.repeat(c, L)]
        if not xs:
            return np.zeros(0), np.zeros(0)
        return np.concatenate(xs), np.concatenate(ys)

    def box_occupancy(self, L):
        occ = np.zeros((L, L), dtype=bool)
        for q, v in zip(self.qs.tolist(), self.vals.tolist()):
            if v > 0:
                occ |= _star_boxes(q, v, L)
        return occ


class ScaleMatchedStars:
    """At grid size 1/L, the A_q whose arm width 2 psi(q)/q is comparable to 1/L.

    Active q are those with arm_factor * 2 psi(q)/q >= 1/L, restricted to the top
    band (q*/band, q*] of that range. A plain truncated union contains every
    line x_i = a/q with q <= qmax and looks two-dimensional at every desk
    resolution; matching q to the scale keeps only the pieces a cover of the
    limsup set at that scale would use.
    """

    def __init__(self, psi, Q, qmax, arm_factor=16.0, band=1.5):
        self.qs = Q.iterate(qmax)
        self.vals = psi.values(self.qs)
        keep = self.vals > 0
        self.qs, self.vals = self.qs[keep], self.vals[keep]
        self.arm_factor = arm_factor
        self.band = band

    def active(self, L):
        arm = self.arm_factor * 2 * self.vals / self.qs
        ok = arm >= 1.0 / L
        if not np.any(ok):
            return self.qs[:0], self.vals[:0]
        top = self.qs[ok].max()
        sel = ok & (self.qs <= top) & (self.qs > top / self.band)
        return self.qs[sel], self.vals[sel]

    def box_occupancy(self, L):
        occ = np.zeros((L, L), dtype=bool)
        for q, v in zip(*(a.tolist() for a in self.active(L))):
            occ |= _star_boxes(q, v, L)
        return occ


def _fit(resolutions, counts):
    counts = np.asarray(counts, dtype=float)
    if np.any(counts <= 0) or np.all(counts == counts[0]):
        raise DegenerateFit(f"box counts give no usable fit: {counts.astype(int).tolist()}")
    lr = np.log(np.asarray(resolutions, dtype=float))
    lc = np.log(counts)
    coef = np.polyfit(lr, lc, 1)
    resid = float(np.sqrt(np.mean((lc - np.polyval(coef, lr)) ** 2)))
    local = (np.diff(lc) / np.diff(lr)).tolist()
    return float(coef[0]), resid, local


def box_counting_dimension(oracle, resolutions, sampler=None, per_box=4):
    """Fit log N(L) against log L over grid sizes L (boxes of side 1/L).

    Oracles with ``box_occupancy(L)`` are counted exactly. Otherwise boxes are
    found from hits among ``per_box`` jittered samples in every box of the
    finest grid plus the oracle's ``probe_points`` when it has them; hits are
    pooled over all resolutions so coarser counts never miss what finer ones
    saw.
    """
    resolutions = [int(L) for L in resolutions]
    if len(resolutions) < 3 or any(b <= a for a, b in zip(resolutions, resolutions[1:])):
        raise DomainError("need at least three increasing resolutions")
    if hasattr(oracle, "box_occupancy"):
        counts = [int(oracle.box_occupancy(L).sum()) for L in resolutions]
    else:
        sampler = sampler or SeededSampler(0)
        top = resolutions[-1]
        hx, hy = [], []
        g = sampler.generator()
        i, j = np.meshgrid(np.arange(top), np.arange(top), indexing="ij")
        for _ in range(per_box):
            x1 = (i.ravel() + g.random(top * top)) / top
            x2 = (j.ravel() + g.random(top * top)) / top
            m = oracle.contains(x1, x2)
            hx.append(x1[m])
            hy.append(x2[m])
        if hasattr(oracle, "probe_points"):
            for L in resolutions:
                x1, x2 = oracle.probe_points(L)
                if len(x1):
                    m = oracle.contains(x1, x2)
                    hx.append(x1[m])
                    hy.append(x2[m])
        hx = np.concatenate(hx)
        hy = np.concatenate(hy)
        counts = []
        for L in resolutions:
            b1 = np.minimum((hx * L).astype(np.int64), L - 1)
            b2 = np.minimum((hy * L).astype(np.int64), L - 1)
            counts.append(int(np.unique(b1 * L + b2).size))
    slope, resid, local = _fit(resolutions, counts)
    return BoxCountResult(resolutions, counts, slope, resid, local)


# Borel-Cantelli


def measure_terms(vals):
    """Lebesgue measure of A_q from psi(q): the closed form below 1/4, else the whole torus."""
    vals = np.asarray(vals, dtype=float)
    safe = np.clip(vals, 1e-300, 0.25)
    m = 4 * safe * (1 + np.log(1 / (4 * safe)))
    return np.where(vals <= 0, 0.0, np.where(vals >= 0.25, 1.0, m))


@dataclass
class BCSeries:
    q: np.ndarray
    psi: np.ndarray
    measure: np.ndarray
    measure_partial: np.ndarray
    gallagher_partial: np.ndarray
    converges: object

    def rows(self):
        for i in range(len(self.q)):
            yield (
                int(self.q[i]),
                float(self.psi[i]),
                float(self.measure[i]),
                float(self.measure_partial[i]),
                float(self.gallagher_partial[i]),
            )


def borel_cantelli_sums(psi, Q, qmax, cfg=None):
    """Series of measures of A_q with partial sums, Gallagher partial sums and a convergence verdict."""
    if qmax < 1:
        raise DomainError("qmax must be >= 1")
    qs = Q.iterate(qmax)
    vals = psi.values(qs)
    meas = measure_terms(vals)
    verdict = _power_series_converges(psi, Q)
    if verdict is None:
        verdict = series_converges(measure_terms, psi, Q, cfg or ExponentConfig())
    return BCSeries(
        qs,
        vals,
        meas,
        np.cumsum(meas),
        np.cumsum(gallagher_terms(vals)),
        verdict,
    )


def _hits_chunk(args):
    psi, qs, sampler, i, size = args
    x1, x2 = sampler.substream(i).uniform(size)
    vals = psi.values(qs)
    counts = np.zeros(size, dtype=np.int64)
    for q, v in zip(qs.tolist(), vals.tolist()):
        if v > 0:
            d1 = np.abs(q * x1 - np.rint(q * x1))
            d2 = np.abs(q * x2 - np.rint(q * x2))
            counts += d1 * d2 < v
    return counts


def mean_hit_count(psi, Q, qmax, n, sampler, threads=1):
    """Mean and standard error of hit_count over n uniform points (expected: sum of measures)."""
    qs = Q.iterate(qmax)
    jobs = [(psi, qs, sampler, i, size) for i, size in enumerate(_chunks(n))]
    counts = np.concatenate(parallel_map(_hits_chunk, jobs, threads)).astype(float)
    mean = chunked_fsum(counts) / n
    var = chunked_fsum((counts - mean) ** 2) / max(n - 1, 1)
    return mean, math.sqrt(var / n)


# Fourier decay of cell-supported measures


def cells_transform(cells, xi1, xi2):
    """Transform of the normalized sum of cell indicators at integer frequencies (arrays).

    For disjoint cells this is the uniform measure on their union.
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    total_area = math.fsum(c.area for c in cells)
    re = np.zeros(xi1.shape)
    im = np.zeros(xi1.shape)
    for c in cells:
        h1, h2 = c.halfwidths
        c1, c2 = c.center
        amp = _oscillatory_array(h1, -xi1) * _oscillatory_array(h2, -xi2)
        ph = -2 * np.pi * (xi1 * c1 + xi2 * c2)
        re += amp * np.cos(ph)
        im += amp * np.sin(ph)
    return (re + 1j * im) / total_area


@dataclass
class DecayResult:
    shells: list
    exponent: float
    residual: float

    def to_dict(self):
        return {"shells": self.shells, "exponent": self.exponent, "residual": self.residual}


def dyadic_shells(count, start=0):
    """Sup-norm shells [2^m, 2^(m+1)) for m = start .. start + count - 1."""
    return [(2**m, 2 ** (m + 1)) for m in range(start, start + count)]


def decay_probe(cells, shells, xi_budget, sampler, axis=None):
    """Per-shell max |mu^(xi)| over sampled frequencies and the fitted decay exponent.

    Each shell is sampled with ``xi_budget`` random frequencies of that sup
    norm (half of them on the coordinate axes), drawn from substream = shell
    index. ``axis`` = 1 or 2 restricts sampling to that axis. The exponent is
    minus the least-squares slope of log max against log shell start.
    """
    if not cells:
        raise DomainError("need at least one cell")
    rows = []
    for idx, (lo, hi) in enumerate(shells):
        g = sampler.substream(idx).generator()
        r = g.integers(lo, hi, xi_budget)
        sign = np.where(g.random(xi_budget) < 0.5, -1, 1)
        other = g.integers(-(hi - 1), hi, xi_budget)
        other = np.where(np.arange(xi_budget) % 2 == 0, 0, other)
        other = np.clip(other, -r, r)
        swap = g.random(xi_budget) < 0.5
        if axis == 1:
            xi1, xi2 = sign * r, np.zeros_like(r)
        elif axis == 2:
            xi1, xi2 = np.zeros_like(r), sign * r
        else:
            xi1 = np.where(swap, other, sign * r)
            xi2 = np.where(swap, sign * r, other)
        vals = np.abs(cells_transform(cells, xi1, xi2))
        k = int(np.argmax(vals))
        rows.append({"lo": lo, "hi": hi, "max_abs": float(vals[k]), "xi1": int(xi1[k]), "xi2": int(xi2[k])})
    los = [r["lo"] for r in rows]
    maxes = [r["max_abs"] for r in rows]
    if min(maxes) <= 0:
        raise DegenerateFit("a shell transform vanished on every sampled frequency")
    slope, resid, _ = _fit(los, maxes) if len(set(maxes)) > 1 else (0.0, 0.0, None)
    return DecayResult(rows, -slope, resid)
