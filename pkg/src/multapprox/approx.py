"""Approximation functions, index sets and the hit predicates.

Exact inputs are ``fractions.Fraction``; everything else runs in binary64.
"""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import gmpy2
import numpy as np

from .errors import DomainError, RangeViolation
from .primes import sieve

LINEAR_CAP = Fraction(1, 2)
MULTIPLICATIVE_CAP = Fraction(1, 4)


def nearest_integer_distance(x):
    """Distance from ``x`` to the nearest integer, in [0, 1/2].

    Exact for Fractions and ints; numpy arrays are handled elementwise.
    """
    if isinstance(x, np.ndarray):
        return np.abs(x - np.rint(x))
    if isinstance(x, Rational):
        r = x - math.floor(x)
        return min(r, 1 - r)
    if not math.isfinite(x):
        raise DomainError(f"nearest_integer_distance needs a finite input, got {x!r}")
    r = x - math.floor(x)
    return min(r, 1.0 - r)


def parse_rational(text):
    """Parse "num/den" (or a plain integer or decimal) into a Fraction; any size."""
    text = str(text).strip()
    num, sep, den = text.partition("/")
    try:
        if sep:
            return Fraction(int(gmpy2.mpz(num.strip())), int(gmpy2.mpz(den.strip())))
        if "." in text or "e" in text.lower():
            return Fraction(text)
        return Fraction(int(gmpy2.mpz(text)))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational number: {text!r}") from exc


def format_rational(value):
    value = Fraction(value)
    return f"{gmpy2.mpz(value.numerator).digits(10)}/{gmpy2.mpz(value.denominator).digits(10)}"


def _reduce(x):
    if isinstance(x, Rational):
        return Fraction(x) - math.floor(x)
    return x - math.floor(x)


@dataclass(frozen=True)
class TorusPoint2:
    """A point of the 2-torus; coordinates are reduced mod 1 on construction."""

    x1: object
    x2: object

    def __post_init__(self):
        object.__setattr__(self, "x1", _reduce(self.x1))
        object.__setattr__(self, "x2", _reduce(self.x2))

    @property
    def exact(self):
        return isinstance(self.x1, Fraction) and isinstance(self.x2, Fraction)

    def __iter__(self):
        yield self.x1
        yield self.x2


def as_point(p):
    if p is None or isinstance(p, TorusPoint2):
        return p
    return TorusPoint2(*p)


@dataclass(frozen=True)
class ApproxFunction:
    """An approximation function q -> psi(q).

    Kinds:
      * ``power``: scale * q**(-tau)
      * ``reciprocal``: 1/q
      * ``table``: explicit values, zero off the table
      * ``construction``: sum over built levels of q/(2^k N_k) when q | N_k

    ``power_of`` raises every value to a fixed power (used for psi**(1/2)).
    Values below ``q_min`` are zero. ``range_cap`` is checked once, here.
    """

    kind: str
    tau: float = None
    scale: float = 1.0
    table: dict = None
    levels: tuple = None
    power_of: float = 1.0
    q_min: int = 1
    range_cap: Fraction = None
    _table_q: np.ndarray = field(default=None, repr=False, compare=False)
    _table_v: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("power", "reciprocal", "table", "construction"):
            raise DomainError(f"unknown approximation function kind {self.kind!r}")
        if self.kind == "power" and not (self.tau is not None and self.tau > 0):
            raise DomainError("power kind needs tau > 0")
        if not self.scale > 0:
            raise DomainError("scale must be positive")
        if not self.power_of > 0:
            raise DomainError("power_of must be positive")
        if self.q_min < 1:
            raise DomainError("q_min must be >= 1")
        if self.kind == "table":
            table = {int(q): v for q, v in dict(self.table or {}).items()}
            if any(q < 1 for q in table):
                raise DomainError("table keys must be positive integers")
            if any(v < 0 for v in table.values()):
                raise DomainError("table values must be nonnegative")
            object.__setattr__(self, "table", table)
            qs = np.array(sorted(table), dtype=np.int64)
            object.__setattr__(self, "_table_q", qs)
            object.__setattr__(
                self, "_table_v", np.array([float(table[q]) for q in qs.tolist()])
            )
        if self.kind == "construction":
            object.__setattr__(self, "levels", tuple(self.levels or ()))
        if self.range_cap is not None:
            object.__setattr__(self, "range_cap", Fraction(self.range_cap))
            top = self.supremum()
            if not top < self.range_cap:
                raise RangeViolation(
                    f"{self.kind} approximation function reaches {float(top):.6g}, "
                    f"not below the range cap {self.range_cap}"
                )

    # constructors -------------------------------------------------------

    @classmethod
    def power(cls, tau, scale=1.0, **kw):
        return cls("power", tau=float(tau), scale=float(scale), **kw)

    @classmethod
    def reciprocal(cls, **kw):
        return cls("reciprocal", **kw)

    @classmethod
    def from_table(cls, values, **kw):
        return cls("table", table=dict(values), **kw)

    @classmethod
    def from_levels(cls, levels, **kw):
        return cls("construction", levels=tuple(levels), **kw)

    def root(self, power):
        """psi(q)**power as a new function (e.g. ``root(0.5)`` for the square root)."""
        return ApproxFunction(
            self.kind,
            tau=self.tau,
            scale=self.scale,
            table=self.table,
            levels=self.levels,
            power_of=self.power_of * power,
            q_min=self.q_min,
        )

    def scaled(self, c):
        """c * psi, kept in closed form for power kinds."""
        if self.kind == "power" and self.power_of == 1.0:
            return ApproxFunction.power(self.tau, self.scale * c, q_min=self.q_min)
        if self.kind == "reciprocal" and self.power_of == 1.0:
            return ApproxFunction.power(1.0, c, q_min=self.q_min)
        if self.kind == "table":
            table = {q: v * c for q, v in self.table.items()}
            return ApproxFunction("table", table=table, power_of=self.power_of, q_min=self.q_min)
        raise DomainError(f"cannot scale a {self.kind} function in closed form")

    # metadata -----------------------------------------------------------

    @property
    def finite_support(self):
        return self.kind in ("table", "construction")

    def power_law(self):
        """(c, t) with psi(q) = c q^-t exactly, or None."""
        if self.kind == "power":
            return self.scale**self.power_of, self.tau * self.power_of
        if self.kind == "reciprocal":
            return 1.0, self.power_of
        return None

    def supremum(self):
        """Largest value over the support (exact where possible)."""
        if self.kind == "power":
            return self.scale * float(self.q_min) ** -self.tau
        if self.kind == "reciprocal":
            return Fraction(1, self.q_min)
        if self.kind == "table":
            vals = [v for q, v in self.table.items() if q >= self.q_min]
            return max(vals, default=0)
        # construction: ψ_k(N_k) = 2^-k is the level maximum; q = 1 collects every level
        cands = [Fraction(1, 2**lv.k) for lv in self.levels]
        cands.append(self.exact(1) if self.q_min <= 1 else 0)
        return max(cands, default=0)

    # evaluation ---------------------------------------------------------

    def exact(self, q):
        """psi(q) as a Fraction when the kind allows it, else a float."""
        if q < 1:
            raise DomainError(f"psi is defined for q >= 1, got {q}")
        if q < self.q_min:
            return Fraction(0)
        if self.kind == "reciprocal":
            base = Fraction(1, q)
        elif self.kind == "power":
            if self.scale == 1.0 and float(self.tau).is_integer():
                base = Fraction(1, q ** int(self.tau))
            else:
                base = self.scale * float(q) ** -self.tau
        elif self.kind == "table":
            base = self.table.get(q, Fraction(0))
        else:
            base = Fraction(0)
            for lv in self.levels:
                if lv.N % q == 0:
                    base += Fraction(q, 2**lv.k * lv.N)
        if self.power_of == 1.0:
            return base
        return float(base) ** self.power_of

    def __call__(self, q):
        return float(self.exact(q))

    def values(self, qs):
        """Vectorised float evaluation over an integer array."""
        qs = np.asarray(qs, dtype=np.int64)
        if self.kind == "power":
            out = self.scale * qs.astype(float) ** -self.tau
        elif self.kind == "reciprocal":
            out = 1.0 / qs.astype(float)
        elif self.kind == "table":
            idx = np.searchsorted(self._table_q, qs)
            idx = np.minimum(idx, max(len(self._table_q) - 1, 0))
            if len(self._table_q):
                hit = self._table_q[idx] == qs
                out = np.where(hit, self._table_v[idx], 0.0)
            else:
                out = np.zeros(qs.shape)
        else:
            out = np.array([float(self.exact(int(q))) for q in qs.ravel()]).reshape(qs.shape)
        out = np.where(qs >= self.q_min, out, 0.0)
        if self.power_of != 1.0:
            out = out**self.power_of
        return out

    # serialisation ------------------------------------------------------

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "power":
            d["tau"] = self.tau
            if self.scale != 1.0:
                d["scale"] = self.scale
        if self.kind == "table":
            d["values"] = {
                str(q): (format_rational(v) if isinstance(v, Rational) else float(v))
                for q, v in sorted(self.table.items())
            }
        if self.kind == "construction":
            d["levels"] = [lv.to_dict() for lv in self.levels]
        if self.power_of != 1.0:
            d["power_of"] = self.power_of
        if self.q_min != 1:
            d["q_min"] = self.q_min
        if self.range_cap is not None:
            d["range_cap"] = format_rational(self.range_cap)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind")
        kw = {}
        if "range_cap" in d:
            kw["range_cap"] = parse_rational(d.pop("range_cap"))
        for key in ("power_of", "q_min"):
            if key in d:
                kw[key] = d.pop(key)
        if kind == "power":
            out = cls.power(d.pop("tau"), d.pop("scale", 1.0), **kw)
        elif kind == "reciprocal":
            out = cls.reciprocal(**kw)
        elif kind == "table":
            vals = {
                int(q): (parse_rational(v) if isinstance(v, str) else float(v))
                for q, v in d.pop("values").items()
            }
            out = cls.from_table(vals, **kw)
        elif kind == "construction":
            from .counterexample import LevelData

            out = cls.from_levels([LevelData.from_dict(x) for x in d.pop("levels")], **kw)
        else:
            raise DomainError(f"unknown approximation function kind {kind!r}")
        if d:
            raise DomainError(f"unknown keys for {kind}: {sorted(d)}")
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def psi_eval(psi, q, exact=False):
    """Evaluate ``psi`` at ``q``; zero outside the support."""
    if q < 1:
        raise DomainError(f"psi is defined for q >= 1, got {q}")
    return psi.exact(q) if exact else psi(q)


def parse_psi(desc):
    """Parse a command-line descriptor: ``power:TAU[:SCALE]``, ``reciprocal`` or JSON."""
    desc = desc.strip()
    if desc.startswith("{"):
        return ApproxFunction.from_json(desc)
    head, *rest = desc.split(":")
    if head == "power" and 1 <= len(rest) <= 2:
        return ApproxFunction.power(float(rest[0]), float(rest[1]) if len(rest) == 2 else 1.0)
    if head == "reciprocal" and not rest:
        return ApproxFunction.reciprocal()
    raise DomainError(f"cannot parse approximation function descriptor {desc!r}")


# index sets ---------------------------------------------------------------


@dataclass(frozen=True)
class IndexSet:
    """A set Q of positive integers: ``all``, ``primes``, ``explicit`` or ``stride``."""

    kind: str = "all"
    members: tuple = ()
    start: int = 1
    step: int = 1

    def __post_init__(self):
        if self.kind not in ("all", "primes", "explicit", "stride"):
            raise DomainError(f"unknown index set kind {self.kind!r}")
        if self.kind == "explicit":
            mem = tuple(sorted(set(int(q) for q in self.members)))
            if any(q < 1 for q in mem):
                raise DomainError("index set members must be positive")
            object.__setattr__(self, "members", mem)
        if self.kind == "stride" and (self.start < 1 or self.step < 1):
            raise DomainError("stride needs start >= 1 and step >= 1")

    @classmethod
    def naturals(cls):
        return cls("all")

    @classmethod
    def primes(cls):
        return cls("primes")

    @classmethod
    def explicit(cls, members):
        return cls("explicit", members=tuple(members))

    @classmethod
    def stride(cls, start, step):
        return cls("stride", start=start, step=step)

    @property
    def finite(self):
        return self.kind == "explicit"

    @property
    def convergence_exponent(self):
        """inf{a : sum_{q in Q} q^-a < inf}: 1 for the infinite kinds, 0 if finite."""
        return 0.0 if self.finite else 1.0

    def iterate(self, qmax):
        """Members q <= qmax, strictly increasing, as an int64 array."""
        if self.kind == "all":
            return np.arange(1, qmax + 1, dtype=np.int64)
        if self.kind == "primes":
            return sieve(qmax)
        if self.kind == "stride":
            return np.arange(self.start, qmax + 1, self.step, dtype=np.int64)
        mem = np.array(self.members, dtype=np.int64)
        return mem[mem <= qmax]

    def __contains__(self, q):
        q = int(q)
        if q < 1:
            return False
        if self.kind == "all":
            return True
        if self.kind == "primes":
            return q >= 2 and all(q % p for p in range(2, math.isqrt(q) + 1))
        if self.kind == "stride":
            return q >= self.start and (q - self.start) % self.step == 0
        return q in self.members

    def to_dict(self):
        if self.kind == "explicit":
            return {"kind": "explicit", "members": list(self.members)}
        if self.kind == "stride":
            return {"kind": "stride", "start": self.start, "step": self.step}
        return {"kind": self.kind}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind")
        if kind == "explicit":
            out = cls.explicit(d.pop("members"))
        elif kind == "stride":
            out = cls.stride(d.pop("start"), d.pop("step"))
        else:
            out = cls(kind)
        if d:
            raise DomainError(f"unknown keys for index set {kind}: {sorted(d)}")
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def parse_index_set(desc):
    """``all``, ``primes``, ``stride:START:STEP``, ``explicit:1,2,3`` or JSON."""
    desc = desc.strip()
    if desc.startswith("{"):
        return IndexSet.from_json(desc)
    head, _, rest = desc.partition(":")
    if head in ("all", "primes") and not rest:
        return IndexSet(head)
    if head == "stride":
        a, b = rest.split(":")
        return IndexSet.stride(int(a), int(b))
    if head == "explicit":
        return IndexSet.explicit(int(t) for t in rest.split(",") if t)
    raise DomainError(f"cannot parse index set descriptor {desc!r}")


# hit predicates -----------------------------------------------------------


def is_hit(q, p, psi, mode="multiplicative", offset=None):
    """Whether q approximates p: ||q x1 - y1|| ||q x2 - y2|| < psi(q).

    ``linear`` mode tests the first coordinate only. Exact when p (and the
    offset, if any) hold Fractions and psi(q) is rational.
    """
    p = as_point(p)
    offset = as_point(offset)
    exact = p.exact and (offset is None or offset.exact)
    value = psi.exact(q) if exact else psi(q)
    if not value > 0:
        return False
    y1, y2 = (0, 0) if offset is None else (offset.x1, offset.x2)
    d1 = nearest_integer_distance(q * p.x1 - y1)
    if mode == "linear":
        return d1 < value
    if mode != "multiplicative":
        raise DomainError(f"unknown mode {mode!r}")
    d2 = nearest_integer_distance(q * p.x2 - y2)
    return d1 * d2 < value


def hit_mask(p, psi, qs, mode="multiplicative", offset=None):
    """Float path of is_hit over an array of q values."""
    p = as_point(p)
    offset = as_point(offset)
    qs = np.asarray(qs, dtype=np.int64)
    vals = psi.values(qs)
    y1, y2 = (0.0, 0.0) if offset is None else (float(offset.x1), float(offset.x2))
    qf = qs.astype(float)
    d1 = nearest_integer_distance(qf * float(p.x1) - y1)
    if mode == "linear":
        target = d1
    elif mode == "multiplicative":
        target = d1 * nearest_integer_distance(qf * float(p.x2) - y2)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    return (target < vals) & (vals > 0)


def hit_count(p, psi, Q, qmax, mode="multiplicative", offset=None, exact=False):
    """#{q in Q, q <= qmax : is_hit(q, p)}."""
    if qmax < 1:
        raise DomainError("qmax must be >= 1")
    qs = Q.iterate(qmax)
    if exact:
        return sum(1 for q in qs.tolist() if is_hit(q, p, psi, mode, offset))
    return int(np.count_nonzero(hit_mask(p, psi, qs, mode, offset)))
