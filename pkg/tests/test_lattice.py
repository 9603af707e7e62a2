import math

import numpy as np
import pytest

from multapprox import lattice
from multapprox.errors import BudgetExceeded, DomainError
from multapprox.fourier import (
    S_term,
    default_kmax,
    in_first_range,
    lemma33_certified,
    lemma33_lhs,
    lemma33_rhs,
    log_power_crossover,
    loglog_slope,
)
from multapprox.geometry import dyadic_index_range
from oracles import brute_lattice_sum, mp_harmonic_power_sum, mp_power_sum


def test_harmonic_numbers():
    assert lattice.harmonic(0) == 0.0
    assert lattice.harmonic(1) == 1.0
    assert lattice.harmonic(4) == pytest.approx(25 / 12, rel=1e-15)
    n = lattice.DIRECT + 10
    want = lattice.harmonic(lattice.DIRECT) + math.fsum(1 / k for k in range(lattice.DIRECT + 1, n + 1))
    assert lattice.harmonic(n) == pytest.approx(want, rel=1e-15)


@pytest.mark.parametrize("p", [0.3, 1.0, 1.5, 2.5])
def test_power_sums_small_ranges(p):
    for a, b in ((1, 1), (1, 50), (17, 400), (5, 4)):
        want = mp_power_sum(p, a, b) if b >= a else 0.0
        assert lattice.power_sum(p, a, b) == pytest.approx(want, rel=1e-14, abs=0)
        want = mp_harmonic_power_sum(p, a, b) if b >= a else 0.0
        assert lattice.power_harmonic_sum(p, a, b) == pytest.approx(want, rel=1e-14, abs=0)


@pytest.mark.parametrize("p", [0.5, 1.0, 1.5])
def test_power_sums_cross_the_direct_limit(p):
    a, b = lattice.DIRECT - 100, lattice.DIRECT + 3000
    m = np.arange(a, b + 1, dtype=float)
    direct = math.fsum((m**-p).tolist())
    assert lattice.power_sum(p, a, b) == pytest.approx(direct, rel=1e-13)
    h = lattice.harmonic(a - 1) + np.cumsum(1.0 / m)
    direct = math.fsum((m**-p * h).tolist())
    assert lattice.power_harmonic_sum(p, a, b) == pytest.approx(direct, rel=1e-13)


def test_capped_reciprocal_pieces():
    f = lattice.CappedReciprocal(0.3, 3)
    k = np.arange(1, 21)
    vals = f.values(k)
    for lo, hi in ((1, 20), (2, 3), (4, 9)):
        got = lattice.weighted_sum(0.0, [f.value_terms(lo, hi)], lo, hi)
        assert got == pytest.approx(vals[lo - 1 : hi].sum(), rel=1e-14)
    F = np.cumsum(vals)
    for shift in (0, 1):
        want = sum(F[m - 1 - shift] if m - shift >= 1 else 0.0 for m in range(1, 21))
        got = lattice.weighted_sum(0.0, [f.partial_terms(1, 20, shift=shift)], 1, 20)
        assert got == pytest.approx(want, rel=1e-14)


def test_supporting_partial_sum_bounds():
    for s in (0.3, 0.5, 0.9):
        for xi in (10, 1000):
            assert lattice.power_sum(s, 1, xi) <= xi ** (1 - s) / (1 - s)
            tail = lattice.power_sum(1 + s, xi + 1, 10**12) + (10**12) ** -s / s
            assert tail <= xi**-s / s


def test_log_power_crossover():
    eps = 0.05
    psi0 = log_power_crossover(eps)
    y0 = math.log(1 / psi0)
    assert math.exp(eps * y0) == pytest.approx(y0, rel=1e-10)
    for psi in (psi0 * 0.5, psi0 * 1e-3, psi0 * 1e-30):
        assert (1 / psi) ** eps > math.log(1 / psi)
    assert (1 / (psi0 * 2)) ** eps < math.log(1 / (psi0 * 2))
    with pytest.raises(DomainError):
        log_power_crossover(0.5)


def test_s_term_examples():
    q, psi = 8, 2.0**-9
    assert S_term(5, (0, 0), q, psi, 0.5) == psi
    for j in dyadic_index_range(q, psi):
        want = min(1.0, q * 2.0**-j) * min(1.0, psi * 2.0**j / q) * q**-0.5
        assert S_term(j, (1, 1), q, psi, 0.5) == want
        assert S_term(j, (3, 7), q, psi, 1e-12) == pytest.approx(
            min(1 / 3, q * 2.0**-j) * min(1 / 7, psi * 2.0**j / q), rel=1e-10
        )
    with pytest.raises(DomainError):
        S_term(5, (-1, 0), q, psi, 0.5)


def test_omega0_exact():
    r = lemma33_lhs(8, 2.0**-9, 0.5)
    assert r.levels == 9
    assert r.omega0 == 9 * 2.0**-9


@pytest.mark.parametrize("q,psi,kmax", [(3, 1 / 9, None), (4, 1 / 64, 150), (5, 0.2, None)])
def test_analytic_matches_brute_force(q, psi, kmax):
    res = lemma33_lhs(q, psi, 0.5, kmax)
    direct = lemma33_lhs(q, psi, 0.5, kmax, method="direct")
    K = res.kmax
    brute = [brute_lattice_sum(q, psi, 0.5, K, j) for j in dyadic_index_range(q, psi)]
    for name in ("omega1", "omega2"):
        want = math.fsum(b[name] for b in brute)
        assert getattr(res, name) == pytest.approx(want, rel=1e-12)
        assert getattr(direct, name) == pytest.approx(want, rel=1e-12)
    upper = math.fsum(b["upper"] for b in brute)
    lower = math.fsum(b["lower"] for b in brute)
    assert res.t11 + res.t21 == pytest.approx(upper, rel=1e-12)
    assert res.t12 + res.t22 == pytest.approx(lower, rel=1e-12)
    total = math.fsum([res.omega0, upper, lower] + [b["omega1"] + b["omega2"] for b in brute])
    assert res.total == pytest.approx(total, rel=1e-12)
    assert direct.total == pytest.approx(total, rel=1e-12)


def test_range_split_matches_levels():
    q, psi = 16, 16.0**-3
    res = lemma33_lhs(q, psi, 0.5)
    for row in res.per_level:
        assert row["range"] == (1 if 2 ** row["j"] < q / math.sqrt(psi) else 2)
        assert in_first_range(q, row["j"], psi) == (row["range"] == 1)


@pytest.mark.parametrize("q", [4, 16, 64])
def test_parts_sum_to_total(q):
    res = lemma33_lhs(q, q**-3.0, 0.5)
    assert abs(res.parts_sum - res.total) <= 1e-9 * res.total
    assert res.kmax == default_kmax(q, q**-3.0)
    d = res.to_dict()
    assert "per_level" not in d and d["parts_sum"] == res.parts_sum


def test_tail_estimate_bounds_truncation():
    q, psi = 16, 16.0**-3
    for s in (0.3, 0.5, 0.9):
        short = lemma33_lhs(q, psi, s)
        long = lemma33_lhs(q, psi, s, kmax=short.kmax * 2**20)
        assert 0 <= long.total - short.total <= short.tail_estimate


def test_certified_truncation():
    res = lemma33_certified(16, lambda q: q**-3.0, 0.5)
    assert res.tail_estimate <= 1e-6 * res.total
    assert res.kmax > default_kmax(16, 16.0**-3)
    with pytest.raises(BudgetExceeded):
        lemma33_certified(16, 16.0**-3, 0.5, rtol=1e-30, max_steps=2)


def test_signed_total_counts_sign_classes():
    q, psi, s = 3, 1 / 9, 0.5
    res = lemma33_lhs(q, psi, s)
    K = res.kmax
    want = []
    for j in dyadic_index_range(q, psi):
        for k1 in range(-K, K + 1):
            for k2 in range(-K, K + 1):
                want.append(S_term(j, (abs(k1), abs(k2)), q, psi, s))
    assert res.signed_total == pytest.approx(math.fsum(want), rel=1e-12)


def test_lhs_errors():
    with pytest.raises(DomainError):
        lemma33_lhs(4, 1 / 64, 0.0)
    with pytest.raises(DomainError):
        lemma33_lhs(4, 1 / 64, 0.5, kmax=0)
    with pytest.raises(DomainError):
        lemma33_lhs(4, 1 / 64, 0.5, method="guess")
    with pytest.raises(BudgetExceeded):
        lemma33_lhs(64, 64.0**-3, 0.5, method="direct")


def test_rhs_literal():
    q, psi, s, eps = 16, 16.0**-3, 0.5, 0.05
    want = psi * math.log(1 / psi) + q ** -(s - eps) * psi ** ((s - eps) / 2)
    assert lemma33_rhs(q, psi, s, eps) == want
    assert lemma33_rhs(q, psi, s, eps) > 0
    with pytest.raises(DomainError):
        lemma33_rhs(q, psi, 0.5, 0.5)


def test_loglog_slope():
    xs = [1, 10, 100]
    assert loglog_slope(xs, [3 * x**1.5 for x in xs]) == pytest.approx(1.5)
