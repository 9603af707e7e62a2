"""Prime generation: a numpy sieve for small ranges, gmpy2 beyond that."""

import math

import gmpy2
import numpy as np

# Segments above this bound are walked with next_prime instead of sieved.
SIEVE_LIMIT = 10**9
_SEGMENT = 1 << 20


def sieve(n):
    """All primes p <= n as an int64 array (Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def primes_between(lo, hi):
    """Primes in the half-open range [lo, hi) via a segmented sieve."""
    lo = max(lo, 2)
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    base = sieve(math.isqrt(hi - 1) + 1)
    flags = np.ones(hi - lo, dtype=bool)
    for p in base.tolist():
        start = max(p * p, -(-lo // p) * p)
        flags[start - lo :: p] = False
    return np.flatnonzero(flags).astype(np.int64) + lo


def primes_above(n, limit=None):
    """Yield primes p > n in increasing order, stopping before ``limit``.

    Ranges below SIEVE_LIMIT are sieved in segments; above it gmpy2's
    next_prime is used (a BPSW probable-prime test, deterministic below 2**64).
    """
    n = int(n)
    cur = n + 1
    while cur < SIEVE_LIMIT:
        hi = min(cur + _SEGMENT, SIEVE_LIMIT)
        if limit is not None:
            hi = min(hi, limit)
        for p in primes_between(cur, hi).tolist():
            yield p
        if limit is not None and hi >= limit:
            return
        cur = hi
    p = gmpy2.mpz(cur - 1)
    while True:
        p = gmpy2.next_prime(p)
        if limit is not None and p >= limit:
            return
        yield int(p)
