"""
A divergent psi supported on thin levels
========================================

Level k collects consecutive primes above the previous product N until
their reciprocals sum past a threshold. psi is supported on N/p, the
Khintchine-type sum diverges, yet every hit at level k forces ||N x|| < 2^-k.
"""

import random

from multapprox.counterexample import (
    ConstructionConfig,
    adversarial_samples,
    build_construction,
    decimal_digits,
    envelope_series,
    random_rationals,
    stable_digits,
    verify_divergence,
    verify_transfer,
)

lv = build_construction(ConstructionConfig(levels=1, mode="exact")).levels[0]
print(f"level 1: {len(lv.primes)} primes up to {lv.primes[-1]}, sum 1/p = {float(lv.reciprocal_sum):.6f}")

rng = random.Random(0)
samples = random_rationals(2000, 10**6, rng) + adversarial_samples(lv, 2000, rng)
print("transfer:", verify_transfer(lv, samples, rng=rng).to_dict())

# scaled thresholds keep the primes small enough for four levels
levels = build_construction(ConstructionConfig(levels=4, mode="scaled")).levels
for lv, row in zip(levels, verify_divergence(levels)):
    print(f"k={lv.k}: {len(lv.primes)} primes, N has {decimal_digits(lv.N)} digits, exceeds target: {row['exceeds_target']}")
env = envelope_series(levels, 0.01)
print("envelope partial sums:", env, "stable digits:", stable_digits(env))
