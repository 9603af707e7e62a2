import math

import mpmath
import numpy as np
import pytest

from multapprox.approx import ApproxFunction, IndexSet
from multapprox.errors import DomainError, InconclusiveError
from multapprox.exponents import (
    ExponentConfig,
    block_diagnostics,
    classify_blocks,
    closed_form_exponent,
    dimension_formulas,
    exponent_of_convergence,
    gallagher_converges,
    gallagher_partial_sums,
    khintchine_converges,
    series_terms,
)

N = IndexSet.naturals()
BISECT = ExponentConfig(method="bisection")


def test_closed_form_examples():
    assert exponent_of_convergence("tau", ApproxFunction.reciprocal(), N).value == pytest.approx(2 / 3, abs=1e-15)
    assert exponent_of_convergence("tau", ApproxFunction.power(2), N).value == 0.5
    assert exponent_of_convergence("lambda", ApproxFunction.power(3), N).value == 0.25
    assert exponent_of_convergence("d", ApproxFunction.power(3), N).value == 0.5
    table = ApproxFunction.from_table({2: 0.1, 7: 0.01})
    for kind in ("lambda", "tau", "d"):
        assert exponent_of_convergence(kind, table, N).value == 0.0
        assert exponent_of_convergence(kind, ApproxFunction.power(2), IndexSet.explicit([3, 4])).value == 0.0


def test_closed_form_clamped_and_errors():
    # d exponent of a slowly decaying psi exceeds 1 before clamping
    assert closed_form_exponent("d", ApproxFunction.power(0.5), N) == 1.0
    with pytest.raises(DomainError):
        exponent_of_convergence("mu", ApproxFunction.power(2), N)
    with pytest.raises(DomainError):
        ExponentConfig(method="guess")
    assert closed_form_exponent("tau", ApproxFunction.power(2).root(2), N) == 1 / 3


@pytest.mark.parametrize("tau", [1.5, 3.0])
def test_bisection_agrees_with_closed_form(tau):
    psi = ApproxFunction.power(tau)
    for kind in ("tau", "lambda"):
        b = exponent_of_convergence(kind, psi, N, BISECT)
        c = exponent_of_convergence(kind, psi, N)
        assert b.method == "bisection" and c.method == "closed-form"
        assert b.lo <= b.value <= b.hi
        assert abs(b.value - c.value) < 2e-2


def test_scale_robustness():
    for c in (1.0, 0.5, 0.01):
        psi = ApproxFunction.power(2, c)
        assert exponent_of_convergence("tau", psi, N).value == 0.5
    b = exponent_of_convergence("tau", ApproxFunction.power(2, 0.01), N, BISECT)
    assert abs(b.value - 0.5) < 2e-2


def test_series_terms_nonincreasing_in_s():
    qs = np.arange(1, 1000)
    vals = ApproxFunction.power(2).values(qs)
    for kind in ("lambda", "tau", "d"):
        prev = series_terms(kind, qs, vals, 0.0)
        for s in np.linspace(0.1, 1, 10):
            cur = series_terms(kind, qs, vals, s)
            assert np.all(cur <= prev * (1 + 1e-15))
            prev = cur


def test_classify_blocks():
    assert classify_blocks([1, 0.5, 0.25, 0.12, 0.06, 0.03])[0] == "convergent"
    assert classify_blocks([1, 1, 1.2, 1.3, 2, 3])[0] == "divergent"
    with pytest.raises(InconclusiveError):
        classify_blocks([1, 0.5, 1.0, 0.5, 1.0, 0.5])
    with pytest.raises(InconclusiveError):
        classify_blocks([1, 2])


def test_block_diagnostics_rows():
    rows = block_diagnostics("tau", ApproxFunction.power(2), N, 0.6, ExponentConfig(qmax=2**10))
    assert [r[0] for r in rows] == list(range(11))
    assert rows[3][1:3] == (8, 15)
    assert all(r[4] < 1 for r in rows[1:])


def test_gallagher_partial_sums_power3_against_zeta():
    ps = gallagher_partial_sums(ApproxFunction.power(3), N, 10**6)
    # sum q^-3 log q^3 = -3 zeta'(3); sum q^-3 = zeta(3); tails below 1e-10
    with mpmath.workdps(30):
        g = float(-3 * mpmath.zeta(3, derivative=1))
        k = float(mpmath.zeta(3))
    assert ps.gallagher[-1] == pytest.approx(g, abs=1e-10)
    assert ps.khintchine[-1] == pytest.approx(k, abs=1e-10)
    assert np.all(np.diff(ps.gallagher) >= 0)
    assert np.all(np.diff(ps.khintchine) >= 0)


def test_gallagher_partial_sums_zero_and_divergent():
    ps = gallagher_partial_sums(ApproxFunction.from_table({}), N, 100)
    assert np.all(ps.gallagher == 0) and np.all(ps.khintchine == 0)
    ps = gallagher_partial_sums(ApproxFunction.reciprocal(), N, 10**6)
    assert ps.gallagher[-1] / ps.gallagher[1] > 10
    with pytest.raises(DomainError):
        gallagher_partial_sums(ApproxFunction.reciprocal(), N, 0)


def test_convergence_flags():
    assert khintchine_converges(ApproxFunction.power(2), N)
    assert not khintchine_converges(ApproxFunction.reciprocal(), N)
    assert not gallagher_converges(ApproxFunction.reciprocal(), N)
    assert gallagher_converges(ApproxFunction.power(1.5), N)
    assert gallagher_converges(ApproxFunction.from_table({3: 0.2}), N)


def test_dimension_formulas_examples():
    rep = dimension_formulas(ApproxFunction.power(2), N)
    assert rep.dimF_M == 1.0
    assert rep.dimH_M == pytest.approx(5 / 3, abs=1e-15)
    assert rep.gap == pytest.approx(2 / 3, abs=1e-15)
    assert rep.linear_applicable and rep.multiplicative_applicable and not rep.warnings
    assert dimension_formulas(ApproxFunction.power(3), N).dimF_W == 0.5
    rep = dimension_formulas(ApproxFunction.reciprocal(), N)
    assert rep.dimF_M == pytest.approx(4 / 3, abs=1e-15)
    assert rep.multiplicative_applicable is False
    assert any("true Fourier dimension is 2" in w for w in rep.warnings)
    d = rep.to_dict()
    assert set(d["exponents"]) == {"lambda", "tau", "d"}


def test_lambda_of_root_is_tau():
    for tau in (1.5, 2.0, 3.0, 7.0):
        psi = ApproxFunction.power(tau)
        assert (
            exponent_of_convergence("lambda", psi.root(0.5), N).value
            == exponent_of_convergence("tau", psi, N).value
        )
    assert math.isclose(
        exponent_of_convergence("lambda", ApproxFunction.reciprocal().root(0.5), N).value, 2 / 3, abs_tol=1e-15
    )
