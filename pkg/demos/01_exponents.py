"""
Exponents of convergence
========================

Three series attached to an approximation function psi decide which
dimension formulas apply. For power laws they have closed forms; for
tabulated psi they are located by bisection on dyadic block sums.
"""

import numpy as np

from multapprox import ApproxFunction, IndexSet, dimension_formulas, exponent_of_convergence
from multapprox.exponents import ExponentConfig, block_diagnostics

N = IndexSet.naturals()

# closed forms for psi(q) = q^-tau
for tau in (1.5, 2.0, 3.0):
    psi = ApproxFunction.power(tau)
    vals = {k: exponent_of_convergence(k, psi, N).value for k in ("lambda", "tau", "d")}
    print(f"tau={tau}: " + ", ".join(f"{k}={v:.4f}" for k, v in vals.items()))

# the same numbers recovered numerically, without the closed form
bisect = ExponentConfig(method="bisection")
r = exponent_of_convergence("tau", ApproxFunction.power(2.0), N, bisect)
print("bisection tau-exponent for q^-2:", round(r.value, 4), "bracket", (round(r.lo, 4), round(r.hi, 4)))

# 1/q: the tau-exponent is 2/3, but the series behind the formula diverges
rep = dimension_formulas(ApproxFunction.reciprocal(), N)
print(rep.to_dict())

# near the exponent the dyadic block sums neither grow nor shrink much
for row in block_diagnostics("tau", ApproxFunction.power(2.0), N, 0.5, ExponentConfig(qmax=2**14))[-4:]:
    print(row)

# a tabulated psi with a wobble: bisection still finds 1/2
qs = np.arange(1, 2**16 + 1)
table = ApproxFunction.from_table({int(q): (0.1 + 0.05 * np.sin(q)) / float(q) ** 2 for q in qs})
cfg = ExponentConfig(method="bisection", qmax=2**16)
print("table tau-exponent:", round(exponent_of_convergence("tau", table, N, cfg).value, 4))
print("lambda of its square root:", round(exponent_of_convergence("lambda", table.root(0.5), N, cfg).value, 4))
