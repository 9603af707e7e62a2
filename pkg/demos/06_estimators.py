"""
Sampling estimators
===================

Box counting on truncated unions of stars, Borel-Cantelli partial sums
with the mean hit count they predict, and Fourier decay of the uniform
measure on a few cells.
"""

from multapprox import ApproxFunction, IndexSet
from multapprox.estimate import (
    ScaleMatchedStars,
    SeededSampler,
    borel_cantelli_sums,
    box_counting_dimension,
    decay_probe,
    dyadic_shells,
    mean_hit_count,
)
from multapprox.geometry import CellRectangle

N = IndexSet.naturals()
psi = ApproxFunction.power(3)

res = box_counting_dimension(ScaleMatchedStars(psi, N, 2048), [2**k for k in range(4, 13)], SeededSampler(0))
print(f"box-counting slope {res.slope:.3f} (target 1.5)")

bc = borel_cantelli_sums(ApproxFunction.power(2), N, 2000)
print("last row (q, psi, measure, partial, Gallagher partial):", list(bc.rows())[-1])
mean, err = mean_hit_count(ApproxFunction.power(2), N, 2000, 10**5, SeededSampler(1))
print(f"mean hit count {mean:.3f} +- {err:.3f}")

q, j, psi_q = 5, 3, 1 / 25
cells = [CellRectangle(q, j, a, b, psi_q) for a, b in ((1, 2), (3, 4))]
dec = decay_probe(cells, dyadic_shells(6), 256, SeededSampler(2))
print("decay:", dec.to_dict())
