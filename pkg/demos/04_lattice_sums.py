"""
Lattice sums against the two-term bound
=======================================

Summing S(j, k) over the lattice splits into an origin term, two axes
and four quadrant pieces. The total stays within a bounded multiple of
psi log(1/psi) + q^-(s-eps) psi^((s-eps)/2) as q grows.
"""

from fractions import Fraction

from multapprox.fourier import lemma33_certified, lemma33_lhs, lemma33_rhs, loglog_slope

s, eps = 0.5, 0.05
qs = [2**k for k in range(2, 9)]
ratios = []
for q in qs:
    psi_q = float(q) ** -3
    res = lemma33_certified(q, psi_q, s)
    ratios.append(res.total / lemma33_rhs(q, psi_q, s, eps))
    print(f"q={q:4d} kmax={res.kmax:.2e} parts-total={res.parts_sum - res.total:+.1e} "
          f"omega0 exact={Fraction(res.omega0) == res.levels * Fraction(psi_q)} ratio={ratios[-1]:.2f}")
print(f"log-log slope of the ratio: {loglog_slope(qs, ratios):.4f}")

# with the default truncation the tail is still a visible share of the sum
q = 64
short = lemma33_lhs(q, float(q) ** -3, s)
print(f"default kmax: total {short.total:.4e}, tail bound {short.tail_estimate:.4e}")
