"""
Star domains and their dyadic covering
======================================

A_q is the set of x in the torus with ||q x1|| ||q x2|| < psi(q). Its
area has a closed form, and it sits inside a short list of rectangle
families, one per dyadic shell of ||q x1||.
"""

import numpy as np

from multapprox import covering_family, dyadic_index_range, star_measure
from multapprox.estimate import SeededSampler, monte_carlo_measure
from multapprox.geometry import StarDomain, covered, dyadic_shell

q, psi = 17, 17.0**-2
r = dyadic_index_range(q, psi)
print(f"q={q}, psi={psi:.3e}: shells j = {r.j_lo}..{r.j_hi}")

# area: closed form against a million uniform points
mc = monte_carlo_measure(StarDomain(q, psi).contains, 10**6, SeededSampler(1))
print(f"area {star_measure(psi):.6f}, Monte Carlo {mc.mean:.6f} +- {mc.stderr:.6f}")

# the area does not depend on q
for qq in (2, 1000):
    m = monte_carlo_measure(StarDomain(qq, psi).contains, 2 * 10**5, SeededSampler(qq))
    print(f"  q={qq}: {m.mean:.6f}")

# sample A_q and check every point lands in the covering
x1, x2 = StarDomain(q, psi).sample(10**5, np.random.default_rng(0))
print("escapes:", int(np.count_nonzero(~covered(q, psi, x1, x2))))
shells, counts = np.unique(dyadic_shell(q, psi, x1), return_counts=True)
print("points per shell:", dict(zip(shells.tolist(), counts.tolist())))

# each family is q^2 rectangles of total area 8 psi, so the covering is lossy
fams = covering_family(q, psi)
print(f"{len(fams)} families, total area {sum(f.periodized_mass for f in fams):.5f} vs {star_measure(psi):.5f}")
