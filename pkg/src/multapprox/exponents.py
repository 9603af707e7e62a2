"""Exponents of convergence and the dimension formulas built from them.

Three exponents are supported, each the infimum over s in [0, 1] of the s
for which a series over q in Q converges:

    lambda:  sum (psi(q)/q)^s
    tau:     sum q^-s psi(q)^(s/2)
    d:       sum q (psi(q)/q)^s

Power-law psi has closed forms; anything else goes through a bisection
driven by a dyadic-block convergence heuristic.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InconclusiveError
from .summation import dyadic_blocks

KINDS = ("lambda", "tau", "d")


def series_terms(kind, qs, vals, s):
    """Series terms for one exponent kind at a given s (arrays in, array out)."""
    qf = np.asarray(qs, dtype=float)
    if kind == "lambda":
        return (vals / qf) ** s
    if kind == "tau":
        return qf**-s * vals ** (s / 2)
    if kind == "d":
        return qf * (vals / qf) ** s
    raise DomainError(f"unknown exponent kind {kind!r}")


@dataclass
class ExponentConfig:
    qmax: int = 2**20
    iterations: int = 40
    blocks: int = 5
    decay_ratio: float = 0.95
    method: str = "auto"  # auto | closed-form | bisection

    def __post_init__(self):
        if self.method not in ("auto", "closed-form", "bisection"):
            raise DomainError(f"unknown exponent method {self.method!r}")
        if self.qmax < 2 ** (self.blocks + 2):
            raise DomainError("qmax too small for the requested number of dyadic blocks")


@dataclass
class ExponentResult:
    kind: str
    value: float
    lo: float
    hi: float
    method: str
    evidence: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kind": self.kind,
            "value": self.value,
            "lo": self.lo,
            "hi": self.hi,
            "method": self.method,
        }


@dataclass
class BlockProbe:
    """Outcome of the convergence heuristic at one s."""

    s: float
    label: str  # convergent | divergent | inconclusive
    leaning: str  # convergent | divergent
    ratios: list
    block_sums: list


def classify_blocks(block_sums, blocks=5, decay_ratio=0.95):
    """Label a sequence of dyadic block sums.

    Convergent if each of the last ``blocks`` ratios is below ``decay_ratio``,
    divergent if the last ``blocks`` sums never decrease, inconclusive
    otherwise. Also returns the direction the geometric-mean ratio points to.
    """
    tail = np.asarray(block_sums[-(blocks + 1) :], dtype=float)
    if len(tail) < blocks + 1:
        raise InconclusiveError("not enough complete dyadic blocks")
    if not np.all(np.isfinite(tail)):
        raise InconclusiveError("non-finite block sum")
    if np.all(tail == 0):
        return "convergent", "convergent", [0.0] * blocks
    if np.any(tail[:-1] == 0):
        # support switching on and off: fall back on the net trend
        lean = "convergent" if tail[-1] <= tail[0] else "divergent"
        return "inconclusive", lean, []
    ratios = tail[1:] / tail[:-1]
    if np.all(ratios < decay_ratio):
        label = "convergent"
    elif np.all(ratios >= 1.0):
        label = "divergent"
    else:
        label = "inconclusive"
    g = math.exp(float(np.mean(np.log(ratios)))) if np.all(ratios > 0) else 0.0
    if label == "inconclusive" and ratios.min() < decay_ratio and ratios.max() >= 1 / decay_ratio:
        raise InconclusiveError(
            "block sums neither settle nor grow: ratios "
            + ", ".join(f"{r:.4g}" for r in ratios)
        )
    lean = "convergent" if g < 1.0 else "divergent"
    return label, lean, ratios.tolist()


def _support(psi, Q, qmax):
    qs = Q.iterate(qmax)
    vals = psi.values(qs)
    keep = vals > 0
    return qs[keep], vals[keep]


def _log_terms(kind, logq, logv, s):
    # same terms as series_terms, via one exp over precomputed logs
    if kind == "lambda":
        return np.exp(s * (logv - logq))
    if kind == "tau":
        return np.exp(-s * logq + 0.5 * s * logv)
    return np.exp(logq + s * (logv - logq))


def probe(kind, qs, vals, s, cfg, qmax, logs=None):
    """Run the block heuristic for the series of ``kind`` at exponent s."""
    if logs is None:
        terms = series_terms(kind, qs, vals, s)
    else:
        terms = _log_terms(kind, logs[0], logs[1], s)
    idx, sums = dyadic_blocks(qs, terms)
    # keep only blocks fully inside [1, qmax]
    complete = (2 ** (idx + 1) - 1) <= qmax
    sums = sums[complete]
    if sums.size == 0:
        sums = np.zeros(cfg.blocks + 1)
    elif sums.size < cfg.blocks + 1:
        sums = np.concatenate([np.zeros(cfg.blocks + 1 - sums.size), sums])
    label, lean, ratios = classify_blocks(sums, cfg.blocks, cfg.decay_ratio)
    return BlockProbe(s, label, lean, ratios, sums.tolist())


def closed_form_exponent(kind, psi, Q):
    """The analytic exponent, or None when no closed form is known."""
    if kind not in KINDS:
        raise DomainError(f"unknown exponent kind {kind!r}")
    if psi.finite_support or Q.finite:
        return 0.0
    law = psi.power_law()
    if law is None:
        return None
    _, t = law
    rho = Q.convergence_exponent
    if kind == "lambda":
        val = rho / (t + 1.0)
    elif kind == "tau":
        val = rho / (1.0 + 0.5 * t)
    else:
        val = (1.0 + rho) / (t + 1.0)
    return min(max(val, 0.0), 1.0)


def exponent_of_convergence(kind, psi, Q, cfg=None):
    """Exponent of convergence of the ``kind`` series for psi over Q."""
    cfg = cfg or ExponentConfig()
    if kind not in KINDS:
        raise DomainError(f"unknown exponent kind {kind!r}")
    if cfg.method in ("auto", "closed-form"):
        val = closed_form_exponent(kind, psi, Q)
        if val is not None:
            return ExponentResult(kind, val, val, val, "closed-form")
        if cfg.method == "closed-form":
            raise DomainError(f"no closed form for a {psi.kind} approximation function")
    return bisect_exponent(kind, psi, Q, cfg)


def bisect_exponent(kind, psi, Q, cfg):
    qs, vals = _support(psi, Q, cfg.qmax)
    # only the last blocks + 1 complete dyadic blocks enter the heuristic
    top_block = int(cfg.qmax + 1).bit_length() - 2
    first = 2 ** max(top_block - cfg.blocks, 0)
    keep = qs >= first
    qs, vals = qs[keep], vals[keep]
    logs = (np.log(qs.astype(float)), np.log(vals))
    resolved = 0

    def converges(s):
        nonlocal resolved
        pr = probe(kind, qs, vals, s, cfg, cfg.qmax, logs)
        if pr.label == "inconclusive":
            resolved += 1
            return pr.leaning == "convergent", pr
        return pr.label == "convergent", pr

    top_ok, top = converges(1.0)
    if not top_ok:
        return ExponentResult(
            kind, 1.0, 1.0, 1.0, "bisection", {"top": top.__dict__, "resolved": resolved}
        )
    bot_ok, bot = converges(0.0)
    if bot_ok:
        return ExponentResult(
            kind, 0.0, 0.0, 0.0, "bisection", {"bottom": bot.__dict__, "resolved": resolved}
        )
    lo, hi = 0.0, 1.0
    last_lo, last_hi = bot, top
    for _ in range(cfg.iterations):
        mid = 0.5 * (lo + hi)
        ok, pr = converges(mid)
        if ok:
            hi, last_hi = mid, pr
        else:
            lo, last_lo = mid, pr
    return ExponentResult(
        kind,
        0.5 * (lo + hi),
        lo,
        hi,
        "bisection",
        {"lo_probe": last_lo.__dict__, "hi_probe": last_hi.__dict__, "resolved": resolved},
    )


def block_diagnostics(kind, psi, Q, s, cfg=None):
    """Rows (block, q_lo, q_hi, block_sum, ratio) for the series at exponent s."""
    cfg = cfg or ExponentConfig()
    qs, vals = _support(psi, Q, cfg.qmax)
    idx, sums = dyadic_blocks(qs, series_terms(kind, qs, vals, s))
    rows = []
    prev = None
    for m, b in zip(idx.tolist(), sums.tolist()):
        ratio = b / prev if prev else float("nan")
        rows.append((m, 2**m, min(2 ** (m + 1) - 1, cfg.qmax), b, ratio))
        prev = b
    return rows


# Gallagher / Khintchine series ----------------------------------------------


def gallagher_terms(vals):
    """psi log(1/psi) with the convention 0 log(1/0) = 0."""
    vals = np.asarray(vals, dtype=float)
    out = np.zeros_like(vals)
    pos = vals > 0
    out[pos] = -vals[pos] * np.log(vals[pos])
    return out


@dataclass
class PartialSums:
    q: np.ndarray
    gallagher: np.ndarray
    khintchine: np.ndarray


def gallagher_partial_sums(psi, Q, qmax):
    """Running sums of psi(q) log(1/psi(q)) and of psi(q) over q in Q, q <= qmax."""
    if qmax < 1:
        raise DomainError("qmax must be >= 1")
    qs = Q.iterate(qmax)
    vals = psi.values(qs)
    return PartialSums(qs, np.cumsum(gallagher_terms(vals)), np.cumsum(vals))


def series_converges(terms_fn, psi, Q, cfg=None):
    """Closed-form or heuristic verdict on convergence of sum terms_fn(psi(q)).

    Returns True/False, or None if the heuristic stays undecided.
    """
    cfg = cfg or ExponentConfig()
    qs, vals = _support(psi, Q, cfg.qmax)
    idx, sums = dyadic_blocks(qs, terms_fn(vals))
    complete = (2 ** (idx + 1) - 1) <= cfg.qmax
    sums = sums[complete]
    try:
        label, lean, _ = classify_blocks(sums, cfg.blocks, cfg.decay_ratio)
    except InconclusiveError:
        return None
    if label == "inconclusive":
        return None
    return label == "convergent"


def _power_series_converges(psi, Q):
    if psi.finite_support or Q.finite:
        return True
    law = psi.power_law()
    if law is None:
        return None
    # sum c q^-t and sum c q^-t log(q^t/c) over an infinite Q both need t > 1
    return law[1] > Q.convergence_exponent


def khintchine_converges(psi, Q, cfg=None):
    known = _power_series_converges(psi, Q)
    if known is not None:
        return known
    return series_converges(lambda v: v, psi, Q, cfg)


def gallagher_converges(psi, Q, cfg=None):
    known = _power_series_converges(psi, Q)
    if known is not None:
        return known
    return series_converges(gallagher_terms, psi, Q, cfg)


@dataclass
class DimensionReport:
    dimF_W: float
    dimF_M: float
    dimH_M: float
    gap: float
    linear_applicable: bool
    multiplicative_applicable: bool
    exponents: dict
    warnings: list

    def to_dict(self):
        return {
            "dimF_W": self.dimF_W,
            "dimF_M": self.dimF_M,
            "dimH_M": self.dimH_M,
            "gap": self.gap,
            "linear_applicable": self.linear_applicable,
            "multiplicative_applicable": self.multiplicative_applicable,
            "exponents": {k: v.to_dict() for k, v in self.exponents.items()},
            "warnings": list(self.warnings),
        }


def dimension_formulas(psi, Q, cfg=None):
    """Formula values for dim_F W, dim_F M2x and dim_H M2x with applicability flags.

    The values are always computed; the flags say whether the hypotheses behind
    the corresponding formula holds (None when undecidable from the data).
    """
    ex = {k: exponent_of_convergence(k, psi, Q, cfg) for k in KINDS}
    lin = khintchine_converges(psi, Q, cfg)
    mult = gallagher_converges(psi, Q, cfg)
    dimF_W = min(2 * ex["lambda"].value, 1.0)
    dimF_M = 2 * ex["tau"].value
    dimH_M = 1 + min(ex["d"].value, 1.0)
    warnings = []
    if lin is False:
        warnings.append("sum psi(q) diverges: the linear Fourier dimension formula does not apply")
    if mult is not True:
        msg = "sum psi(q) log(1/psi(q)) diverges" if mult is False else (
            "convergence of sum psi(q) log(1/psi(q)) is undecided"
        )
        msg += f": 2*tau = {dimF_M:.6g} is not established as the Fourier dimension"
        law = psi.power_law()
        if mult is False and law is not None:
            # monotone psi with divergent Gallagher series: full measure, so dim_F = 2
            msg += "; the set has full Lebesgue measure and its true Fourier dimension is 2"
        warnings.append(msg)
    return DimensionReport(
        dimF_W, dimF_M, dimH_M, dimH_M - dimF_M, lin, mult, ex, warnings
    )
