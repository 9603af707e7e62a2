"""Deterministic reductions and an order-preserving parallel map.

Every reduction goes through ``math.fsum`` (exactly rounded), so the result
does not depend on how the work was partitioned or on the worker count.
"""

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np


def exact_sum(values):
    """Correctly rounded sum of an iterable or array of floats."""
    if isinstance(values, np.ndarray):
        values = values.ravel().tolist()
    return math.fsum(values)


def kahan_sum(values):
    """Neumaier-compensated running sum, kept for streams too long to buffer."""
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def dyadic_blocks(qs, terms):
    """Sum ``terms`` over the dyadic blocks [2^m, 2^(m+1)) of ``qs``.

    Returns (block_index_array, block_sums). Empty blocks are reported as 0.
    """
    qs = np.asarray(qs, dtype=np.int64)
    terms = np.asarray(terms, dtype=float)
    if qs.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    m = np.floor(np.log2(qs.astype(float))).astype(np.int64)
    # guard against log2 rounding at exact powers of two
    m = np.where((np.int64(1) << (m + 1)) <= qs, m + 1, m)
    m = np.where((np.int64(1) << m) > qs, m - 1, m)
    top = int(m.max())
    edges = np.searchsorted(m, np.arange(top + 2))
    sums = np.array([chunked_fsum(terms[edges[b] : edges[b + 1]]) for b in range(top + 1)])
    return np.arange(top + 1, dtype=np.int64), sums


def chunked_fsum(arr, chunk=512):
    """fsum over fixed-size pairwise chunk sums: fast, deterministic, near exact."""
    arr = np.asarray(arr, dtype=float).ravel()
    if arr.size <= chunk:
        return math.fsum(arr.tolist())
    starts = np.arange(0, arr.size, chunk)
    return math.fsum(np.add.reduceat(arr, starts).tolist())


def parallel_map(fn, items, threads=1):
    """``[fn(x) for x in items]``, optionally on a process pool; order is preserved."""
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
