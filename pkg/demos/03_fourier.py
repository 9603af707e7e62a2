"""
Fourier coefficients of the rectangle families
==============================================

The periodized indicator of a family has a product-of-sincs coefficient
that vanishes unless q divides both frequencies, and it is dominated by
a simple envelope.
"""

import numpy as np

from multapprox.fourier import (
    EmpiricalMeasure,
    LebesgueMeasure,
    coeff_bound,
    fejer_nmax,
    measure_of_family,
    periodized_cell_sum,
    rect_fourier_coeff,
)
from multapprox.geometry import dyadic_index_range

q, psi = 5, 1 / 25
j = dyadic_index_range(q, psi).j_lo + 1
print("c(0,0) =", rect_fourier_coeff(q, j, psi, (0, 0)), " 8 psi =", 8 * psi)
print("off the lattice:", [rect_fourier_coeff(q, j, psi, n) for n in ((1, 0), (5, 3), (7, 10))])

# ratio to the envelope over a random sample of lattice frequencies
rng = np.random.default_rng(3)
ratios = []
for _ in range(2000):
    n = tuple(int(v) * q for v in rng.integers(-1000, 1001, 2))
    ratios.append(abs(rect_fourier_coeff(q, j, psi, n)) / coeff_bound(q, j, psi, n))
print(f"max |c| / bound = {max(ratios):.3f}")

# pairing with Lebesgue measure only sees the zero coefficient
print("Lebesgue:", measure_of_family(LebesgueMeasure(), q, j, psi, 7).value)

# a point mass needs smoothing: Cesaro means converge to the indicator value
x = (1 / q, 2 / q)
nmax = fejer_nmax(q, j, psi, *x, 1e-2)
est = measure_of_family(EmpiricalMeasure.dirac(*x), q, j, psi, nmax, smoothing="cesaro")
print(f"point mass at {x}: Nmax={nmax}, estimate {est.value:.4f}, exact {periodized_cell_sum(q, j, psi, *x)}")
