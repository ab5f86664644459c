import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from primedev.additive import TwoValueByIndex, empirical_rho
from primedev.errors import NumericError
from primedev.measures import (Atoms, Binomial, Gaussian, Poisson, cumulant, measure_from_json,
                               measure_moment)
from primedev.primes import build_prime_table

MEASURES = [Atoms([1.0], [1.0]), Atoms([-1.5, 0.0, 2.0], [0.2, 0.3, 0.5]), Poisson(1.0), Poisson(3.0),
            Binomial(1, 0.3), Binomial(2, 0.3), Binomial(7, 0.6), Gaussian()]
CUTOFFS = [math.inf, 0.5, 1.0, 2.5, 6.0]


def test_examples():
    for th in (-2.0, 0.3, 1.7):
        cv = cumulant(Atoms([1.0], [1.0]), th)
        assert cv.lam == pytest.approx(math.expm1(th), rel=1e-15)
        assert cv.dlam == pytest.approx(math.exp(th), rel=1e-15)
        assert cumulant(Poisson(2.0), th).lam == pytest.approx(math.expm1(2.0 * math.expm1(th)), rel=1e-14)
        assert cumulant(Gaussian(), th).lam == pytest.approx(math.expm1(th * th / 2), rel=1e-14)
    assert measure_moment(Gaussian(), 2, math.inf) == 1.0
    assert measure_moment(Atoms([1.0], [1.0]), 1) == 1.0
    series = math.fsum(k * k * stats.poisson.pmf(k, 2.0) for k in range(200))
    assert measure_moment(Poisson(2.0), 2) == pytest.approx(6.0, rel=1e-14)
    assert measure_moment(Poisson(2.0), 2) == pytest.approx(series, rel=1e-14)


@pytest.mark.parametrize("rho", MEASURES, ids=repr)
@pytest.mark.parametrize("C", CUTOFFS)
def test_zero_at_origin(rho, C):
    assert rho.cumulant(0.0, C).lam == 0.0


@pytest.mark.parametrize("rho", MEASURES, ids=repr)
@pytest.mark.parametrize("C", CUTOFFS)
def test_convexity_and_derivatives(rho, C):
    lo, hi = max(-20.0, rho.theta_min(C) + 1e-3), min(20.0, rho.theta_max(C) - 1e-3)
    for th in np.linspace(lo, hi, 81):
        cv = rho.cumulant(th, C)
        assert cv.d2lam >= 0
        # h = 1e-4, shrunk where Lambda varies faster than e^theta so truncation error stays small
        h = 1e-4 / max(1.0, cv.d2lam / max(1.0, abs(cv.dlam)))
        fd = (rho.cumulant(th + h, C).lam - rho.cumulant(th - h, C).lam) / (2 * h)
        assert abs(fd - cv.dlam) <= 1e-6 * max(1.0, abs(cv.dlam))
        fd2 = (rho.cumulant(th + h, C).dlam - rho.cumulant(th - h, C).dlam) / (2 * h)
        assert abs(fd2 - cv.d2lam) <= 1e-6 * max(1.0, abs(cv.d2lam))


@pytest.mark.parametrize("C", [0.5, 1.0, 2.5, 6.0])
@pytest.mark.parametrize("theta", [-3.0, -0.5, 0.7, 2.0, 5.0])
def test_truncated_gaussian_against_quadrature(C, theta):
    cv = Gaussian().cumulant(theta, C)
    phi = stats.norm.pdf
    lam = integrate.quad(lambda y: math.expm1(theta * y) * phi(y), -C, C, epsabs=1e-14, epsrel=1e-13)[0]
    d1 = integrate.quad(lambda y: y * math.exp(theta * y) * phi(y), -C, C, epsabs=1e-14, epsrel=1e-13)[0]
    d2 = integrate.quad(lambda y: y * y * math.exp(theta * y) * phi(y), -C, C, epsabs=1e-14, epsrel=1e-13)[0]
    assert cv.lam == pytest.approx(lam, rel=1e-10, abs=1e-13)
    assert cv.dlam == pytest.approx(d1, rel=1e-10, abs=1e-13)
    assert cv.d2lam == pytest.approx(d2, rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("lam", [0.5, 3.0, 20.0])
@pytest.mark.parametrize("C", [0.5, 2.0, 7.0, 40.0, math.inf])
def test_truncated_poisson_against_direct_sum(lam, C):
    kmax = int(min(C, 400))
    ks = np.arange(kmax + 1)
    pmf = stats.poisson.pmf(ks, lam)
    for theta in (-1.0, 0.4, 1.5):
        cv = Poisson(lam).cumulant(theta, C)
        assert cv.lam == pytest.approx(math.fsum(np.expm1(theta * ks) * pmf), rel=1e-11, abs=1e-14)
        assert cv.dlam == pytest.approx(math.fsum(ks * np.exp(theta * ks) * pmf), rel=1e-11, abs=1e-14)


def test_binomial_against_atoms():
    b = Binomial(5, 0.35)
    ks = np.arange(6)
    a = Atoms(ks.astype(float), stats.binom.pmf(ks, 5, 0.35))
    for C in (math.inf, 2.0, 3.5):
        for th in (-4.0, 0.0, 0.8, 3.0):
            assert b.cumulant(th, C).lam == pytest.approx(a.cumulant(th, C).lam, rel=1e-13, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(MEASURES), st.floats(0.01, 10), st.floats(0.01, 10))
def test_truncated_second_moment_monotone(rho, c1, c2):
    lo, hi = sorted((c1, c2))
    assert measure_moment(rho, 2, lo) <= measure_moment(rho, 2, hi) + 1e-15


def test_closed_interval_convention():
    rho = Atoms([-1.0, 1.0, 2.0], [0.25, 0.25, 0.5])
    assert rho.cumulant(1.0, 1.0).lam == pytest.approx(0.25 * (math.expm1(1.0) + math.expm1(-1.0)))
    assert measure_moment(rho, 1, 1.0) == 0.0


def test_empirical_is_exact_atom_sum():
    rho = empirical_rho(TwoValueByIndex(1.0, 2.0), build_prime_table(1000), 1000)
    for th in (-1.0, 0.5, 2.0):
        direct = math.fsum(w * math.expm1(th * v) for v, w in rho.atoms)
        assert cumulant(rho, th).lam == direct


def test_validation_and_overflow():
    with pytest.raises(ValueError):
        Atoms([1.0, 2.0], [0.5, 0.6])
    with pytest.raises(ValueError):
        Poisson(0.0)
    with pytest.raises(ValueError):
        Binomial(2, 1.0)
    with pytest.raises(NumericError, match="safe range"):
        Poisson(1.0).cumulant(50.0)


@pytest.mark.parametrize("rho", [Atoms([0.5, 2.0], [0.4, 0.6]), Poisson(2.5), Binomial(3, 0.2), Gaussian()], ids=repr)
def test_json_round_trip(rho):
    again = measure_from_json(rho.to_json())
    assert again.to_json() == rho.to_json()


def test_one_sided_overflow_guard():
    # nonnegative support: theta -> -infinity is always safe
    assert Poisson(1.0).cumulant(-800.0).lam == pytest.approx(-1 + math.exp(-1.0), rel=1e-15)
    assert Binomial(3, 0.5).cumulant(-800.0).lam == pytest.approx(-0.875, rel=1e-15)
    assert Atoms([0.0, 2.0], [0.5, 0.5]).cumulant(-1000.0).lam == pytest.approx(-0.5, rel=1e-15)
    with pytest.raises(NumericError):
        Atoms([-2.0, 2.0], [0.5, 0.5]).cumulant(-1000.0)
