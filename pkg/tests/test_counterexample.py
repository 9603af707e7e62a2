import math
import random
from fractions import Fraction

import pytest

from multapprox.approx import ApproxFunction, nearest_integer_distance
from multapprox.errors import BudgetExceeded, DomainError
from multapprox.counterexample import (
    ConstructionConfig,
    LevelData,
    adversarial_samples,
    build_construction,
    check_chaining,
    decimal_digits,
    envelope_series,
    int_to_str,
    parse_theta,
    random_rationals,
    select_level_primes,
    stable_digits,
    str_to_int,
    support_khintchine_sum,
    transfer_divisors,
    verify_divergence,
    verify_transfer,
)
from oracles import first_prefix_exceeding


@pytest.fixture(scope="module")
def exact1():
    return build_construction(ConstructionConfig(levels=1, mode="exact"))


@pytest.fixture(scope="module")
def scaled3():
    return build_construction(ConstructionConfig(levels=3, mode="scaled"))


def test_select_level_primes_examples():
    assert select_level_primes(1, 1, 0) == [2]
    assert select_level_primes(1, 1, Fraction(1, 2)) == [2, 3]
    primes, total = first_prefix_exceeding(2)
    assert select_level_primes(1, 1, 2) == primes
    assert len(primes) == 59 and primes[-1] == 277
    assert total > 2 and total - Fraction(1, 277) <= 2


def test_select_level_primes_budget():
    with pytest.raises(BudgetExceeded):
        select_level_primes(1, 1, 2, budget=100)
    with pytest.raises(BudgetExceeded):
        select_level_primes(2, 10**50, 4)
    with pytest.raises(DomainError):
        select_level_primes(1, 1, -1)


def test_scaled_single_level_values():
    c = build_construction(ConstructionConfig(levels=1, mode="scaled", thetas=["1/2"]))
    (lv,) = c.levels
    assert lv.primes == (2, 3) and lv.N == 6
    psi = c.psi
    assert [psi.exact(q) for q in (6, 3, 2, 1)] == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 6), Fraction(1, 12)]
    assert psi.exact(4) == 0 and psi.exact(5) == 0


def test_exact_level_one(exact1):
    (lv,) = exact1.levels
    assert lv.reciprocal_sum > 2
    assert lv.threshold == 2
    (row,) = verify_divergence(exact1.levels)
    assert row["sum"] == lv.reciprocal_sum / 2
    assert row["exceeds_one"] and row["exceeds_target"]
    assert support_khintchine_sum(exact1.levels) > 1


def test_single_prime_level_falls_short():
    lv = LevelData(1, (2,), 2, Fraction(0))
    (row,) = verify_divergence([lv])
    assert row["sum"] == Fraction(1, 4)
    assert not row["exceeds_one"]


def test_level_data_validation_and_round_trip(scaled3):
    with pytest.raises(DomainError):
        LevelData(1, (2, 3), 7, Fraction(1))
    for lv in scaled3.levels:
        assert LevelData.from_dict(lv.to_dict()) == lv
    psi = ApproxFunction.from_json(scaled3.psi.to_json())
    assert psi.exact(scaled3.levels[1].N) == scaled3.psi.exact(scaled3.levels[1].N)


def test_scaled_build_chains_and_diverges(scaled3):
    levels = scaled3.levels
    assert check_chaining(levels)
    assert [len(lv.primes) for lv in levels] == [3, 33, 13]
    assert [decimal_digits(lv.N) for lv in levels] == [2, 66, 848]
    for row in verify_divergence(levels):
        assert row["exceeds_target"]
    # theta = 2^k r gives a level sum above r
    c = build_construction(ConstructionConfig(levels=1, mode="scaled", thetas=["3/4"]))
    assert verify_divergence(c.levels)[0]["sum"] > Fraction(3, 8)


def test_psi_level_values(scaled3):
    for lv in scaled3.levels[:2]:
        assert lv.psi(lv.N) == Fraction(1, 2**lv.k)
        for p in lv.primes:
            assert lv.psi(lv.N // p) <= Fraction(1, 2 ** (lv.k + 1))
        assert lv.psi(lv.N + 1) == 0
    psi = scaled3.psi
    # q = 1 divides every N_k, so all levels contribute there
    assert psi.exact(1) == sum(Fraction(1, 2**lv.k * lv.N) for lv in scaled3.levels)


def test_transfer_on_centres_and_random(exact1):
    (lv,) = exact1.levels
    centres = [Fraction(a, lv.N) for a in (0, 1, 12345, lv.N - 1)]
    rep = verify_transfer(lv, centres)
    assert rep.holds and rep.premises > 0
    for x in centres:
        assert nearest_integer_distance(lv.N * x) == 0
    rep = verify_transfer(lv, random_rationals(500, 10**6, random.Random(1)))
    assert rep.holds and rep.samples == 500


def test_transfer_on_adversarial_points(scaled3):
    for lv in scaled3.levels[:2]:
        xs = adversarial_samples(lv, 200, random.Random(lv.k))
        rep = verify_transfer(lv, xs)
        assert rep.holds
        # every sample sits just inside the premise for some divisor
        assert rep.premises >= len(xs)


def test_transfer_needs_q_dividing_n():
    lv = LevelData(1, (2, 3), 6, Fraction(1, 2))
    assert verify_transfer(lv, [Fraction(1, 8), Fraction(1, 4)]).holds
    # q = 4 does not divide N = 6: ||4/4|| = 0 < 4/12 but ||6/4|| = 1/2 is not below 1/2
    rep = verify_transfer(lv, [Fraction(1, 4)], divisors=[4])
    assert rep.violations == 1 and not rep.holds
    assert rep.witnesses == [(Fraction(1, 4), 4)]


def test_transfer_divisors_divide_n(scaled3):
    lv = scaled3.levels[1]
    divs = transfer_divisors(lv, rng=random.Random(0))
    assert 1 in divs and lv.N in divs
    assert all(lv.N % d == 0 for d in divs)


def test_envelope_series(scaled3):
    assert envelope_series([], 0.5) == []
    part = envelope_series(scaled3.levels, 1.0)
    assert all(b >= a for a, b in zip(part, part[1:]))
    assert part[-1] <= 1.0
    part = envelope_series(scaled3.levels, 0.01)
    # the third level already fixes 8 digits; the fourth (in the acceptance run) fixes the rest
    assert stable_digits(part) >= 8
    with pytest.raises(DomainError):
        envelope_series(scaled3.levels, 0)


def test_helpers():
    n = 7**9000
    assert str_to_int(int_to_str(n)) == n
    assert decimal_digits(10**5000) == 5001
    assert parse_theta("12/N", 6) == 2
    assert parse_theta("3/2", 6) == Fraction(3, 2)
    assert stable_digits([1.0]) == 0
    assert stable_digits([1.0, 1.0]) == 17
    assert stable_digits([1.0, 1.001]) == 3


def test_config_validation():
    with pytest.raises(DomainError):
        ConstructionConfig(levels=0)
    with pytest.raises(DomainError):
        ConstructionConfig(mode="loose")
    with pytest.raises(DomainError):
        ConstructionConfig(levels=2, mode="scaled", thetas=["1"])
    cfg = ConstructionConfig(levels=2, mode="scaled")
    assert ConstructionConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(DomainError):
        ConstructionConfig(levels=1, mode="scaled", thetas=["-1"]).threshold(1, 1)
    with pytest.raises(BudgetExceeded):
        build_construction(ConstructionConfig(levels=2, mode="exact"))
