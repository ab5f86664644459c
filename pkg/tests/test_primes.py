import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primedev.errors import CapacityError, DomainError
from primedev.primes import build_prime_table, factorize, mertens_sums, omega_sieve


def is_prime_trial(m: int) -> bool:
    if m < 2:
        return False
    return all(m % d for d in range(2, math.isqrt(m) + 1))


@pytest.fixture(scope="module")
def table():
    return build_prime_table(10**6)


def test_small_tables():
    assert build_prime_table(10).primes.tolist() == [2, 3, 5, 7]
    assert build_prime_table(2).primes.tolist() == [2]
    with pytest.raises(DomainError):
        build_prime_table(1)


def test_count_at_million_matches_trial_division(table):
    assert len(table.primes) == 78498
    # independent count: trial division by primes up to 1000
    small = [p for p in range(2, 1001) if is_prime_trial(p)]
    cand = np.arange(2, 10**6 + 1)
    alive = np.ones(len(cand), dtype=bool)
    for p in small:
        alive &= (cand % p != 0) | (cand == p)
    assert int(alive.sum()) == 78498


def test_primes_pass_trial_division(table):
    ps = table.primes
    assert np.all(np.diff(ps) > 0)
    sample = np.random.default_rng(0).choice(ps, 500, replace=False)
    assert all(is_prime_trial(int(p)) for p in sample)
    assert all(is_prime_trial(int(p)) for p in ps[-50:])


def test_spf_consistency():
    t = build_prime_table(5000)
    for m in range(2, 5001):
        s = int(t.spf[m])
        assert m % s == 0 and is_prime_trial(s)
        assert all(m % q for q in range(2, s))


def test_odd_only_table_agrees(table):
    assert np.array_equal(build_prime_table(10**6, with_spf=False).primes, table.primes)


def test_factorize_examples(table):
    assert factorize(60, table) == [(2, 2), (3, 1), (5, 1)]
    assert factorize(97, table) == [(97, 1)]
    assert factorize(2**20, table) == [(2, 20)]
    assert factorize(1, table) == []


def test_factorize_beyond_table_by_trial_division():
    t = build_prime_table(1000)
    assert factorize(2 * 499979, t) == [(2, 1), (499979, 1)]
    assert factorize(997 * 991, t) == [(991, 1), (997, 1)]
    with pytest.raises(CapacityError):
        factorize(1000**2 + 1, t)
    with pytest.raises(DomainError):
        factorize(0, t)


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=1, max_value=10**6))
def test_factorize_reconstructs(m):
    t = _TABLE
    fac = factorize(m, t)
    assert math.prod(p**e for p, e in fac) == m
    assert [p for p, _ in fac] == sorted({p for p, _ in fac})
    assert all(e >= 1 for _, e in fac)
    if m >= 2:
        assert fac[0][0] == int(t.spf[m])


_TABLE = build_prime_table(10**6)


def test_mertens_examples(table):
    assert mertens_sums(table, 10).total == pytest.approx(1 / 2 + 1 / 3 + 1 / 5 + 1 / 7, abs=1e-15)
    ref = math.fsum(1 / p for p in range(2, 101) if is_prime_trial(p))
    assert mertens_sums(table, 100).total == pytest.approx(ref, abs=1e-14)
    m = mertens_sums(table, 10**6)
    assert m.total == m.odd_index + m.even_index
    assert abs(m.odd_index - m.even_index) < 0.5
    with pytest.raises(CapacityError):
        mertens_sums(table, 10**6 + 1)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 10**6), st.integers(2, 10**6))
def test_mertens_monotone(a, b):
    lo, hi = sorted((a, b))
    assert mertens_sums(_TABLE, lo).total <= mertens_sums(_TABLE, hi).total


def test_omega_sieve_examples():
    w = omega_sieve(30)
    assert w[12] == 2 and w[11] == 1 and w[1] == 0 and w[30] == 3
    brute = [len({p for p, _ in factorize(m, _TABLE)}) for m in range(1, 2001)]
    assert omega_sieve(2000)[1:].tolist() == brute


def test_omega_mean_identity(table):
    n = 10**6
    w = omega_sieve(n, table)
    total = int(w[1:].sum(dtype=np.int64))
    rhs = sum(n // int(p) for p in table.primes)
    assert Fraction(total, n) == Fraction(rhs, n)
    assert abs(total / n - rhs / n) <= 1e-12


def test_omega_budget():
    with pytest.raises(CapacityError):
        omega_sieve(10**8 + 1)
