import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import lambertw as scipy_lambertw

from primedev.checks import DUALITY_FAMILIES, duality_gap
from primedev.errors import DomainError
from primedev.measures import Atoms, Binomial, Gaussian, Poisson
from primedev.ratefn import (BOUNDARY, INFINITE, INTERIOR, ClosedForm, closed_form_for, closed_form_rate,
                             lambert_w, legendre_rate, mdp_rate)


def halley_oracle(z, w=0.0):
    # the textbook Halley iteration, run to a fixed point
    for _ in range(200):
        e = math.exp(w)
        f = w * e - z
        nxt = w - f / (e * (w + 1) - (w + 2) * f / (2 * w + 2))
        if nxt == w:
            break
        w = nxt
    return w


def test_lambert_examples():
    assert lambert_w(0.0) == 0.0
    assert abs(lambert_w(math.e) - 1.0) <= 1e-14
    assert lambert_w(1.0) == pytest.approx(halley_oracle(1.0), abs=1e-15)
    assert lambert_w(1.0) == pytest.approx(0.5671432904097838, abs=1e-15)
    with pytest.raises(DomainError):
        lambert_w(-1 / math.e - 1e-9)


def test_lambert_against_scipy():
    z = np.concatenate([-1 / math.e + np.logspace(-12, -0.5, 300), np.logspace(-300, 300, 600)])
    ours = lambert_w(z)
    ref = scipy_lambertw(z).real
    assert np.all(ours >= -1)
    near = z < -0.36
    # the branch point is ill-conditioned: W moves like sqrt(z + 1/e)
    np.testing.assert_allclose(ours[~near], ref[~near], rtol=2e-14)
    np.testing.assert_allclose(ours[near], ref[near], rtol=0, atol=1e-7)


@settings(max_examples=300, deadline=None)
@given(st.floats(-1 / math.e + 1e-12, 1e12))
def test_lambert_round_trip(z):
    w = lambert_w(z)
    assert abs(w * math.exp(w) - z) <= 1e-12 * max(1.0, abs(z))


def test_legendre_examples():
    delta = Atoms([1.0], [1.0])
    r = legendre_rate(delta, 1.0)
    assert r.value == 0.0 and r.theta_star == 0.0
    assert legendre_rate(delta, 2.0).value == pytest.approx(2 * math.log(2) - 1, abs=1e-12)
    r0 = legendre_rate(delta, 0.0)
    assert r0.value == 1.0 and r0.status == BOUNDARY
    assert legendre_rate(delta, -1.0).status == INFINITE


def test_poisson_dense_grid_oracle():
    # independent maximization of theta*x - Lambda(theta) on a fine grid, refined by a local parabola
    theta = np.arange(-30.0, 30.0, 1e-5)
    with np.errstate(over="ignore"):
        f = 3.0 * theta - np.expm1(np.expm1(theta))
    i = int(np.nanargmax(f))
    a, b, c = f[i - 1], f[i], f[i + 1]
    peak = b + (a - c) ** 2 / (8 * (2 * b - a - c))
    assert legendre_rate(Poisson(1.0), 3.0).value == pytest.approx(peak, abs=1e-8)
    assert closed_form_rate("poisson", 3.0, 1.0).value == pytest.approx(peak, abs=1e-8)


def test_closed_form_examples():
    assert closed_form_rate("constant", 1.0, 1.0).value == 0.0
    assert closed_form_rate("constant", 0.0, 1.0).value == 1.0
    assert closed_form_rate("constant", -0.1, 1.0).value == math.inf
    assert abs(closed_form_rate("two_atom_ratio2", 1.5, 1.0).value) <= 1e-15
    w1 = halley_oracle(1.0)
    expected = math.sqrt(w1) + 1 - 1 / math.sqrt(w1)
    assert closed_form_rate("gaussian", 1.0).value == pytest.approx(expected, abs=1e-15)
    assert closed_form_rate("gaussian", 1.0).value == pytest.approx(legendre_rate(Gaussian(), 1.0).value, abs=1e-12)
    assert mdp_rate(0) == 0 and mdp_rate(1) == 0.5 and mdp_rate(-2) == 2


@pytest.mark.parametrize("cf", [c for c in DUALITY_FAMILIES if c.asserted], ids=lambda c: f"{c.family}-{c.param}")
def test_duality(cf):
    assert duality_gap(cf) <= 1e-8


def test_binomial2_printed_is_reported_not_asserted():
    cf = ClosedForm("binomial2", 0.3)
    assert not cf.asserted
    assert duality_gap(cf) > 1e-3


def test_binomial1_is_bernoulli():
    beta = 0.3
    rho = Atoms([0.0, 1.0], [1 - beta, beta])
    for x in np.linspace(0.05, 1.2, 30):
        assert closed_form_rate("binomial1", x, beta).value == pytest.approx(legendre_rate(rho, x).value, abs=1e-10)


def test_closed_form_for_detects_families():
    assert closed_form_for(Atoms([2.0], [1.0])).family == "constant"
    assert closed_form_for(Atoms([1.0, 2.0], [0.5, 0.5])).family == "two_atom_ratio2"
    assert closed_form_for(Poisson(2.0)).family == "poisson"
    assert closed_form_for(Gaussian()).family == "gaussian"
    assert closed_form_for(Atoms([1.0, 3.0], [0.5, 0.5])) is None


RHOS = [Atoms([1.0], [1.0]), Atoms([-1.0, 0.5, 3.0], [0.3, 0.3, 0.4]), Poisson(0.7), Binomial(3, 0.4), Gaussian()]


@pytest.mark.parametrize("rho", RHOS, ids=repr)
@pytest.mark.parametrize("C", [math.inf, 2.0])
def test_rate_shape(rho, C):
    # range of Lambda' is (lower, upper): a half-line when the support is one-sided
    lower = -math.inf if rho.mass(-math.inf, 0.0, C) > 0 else 0.0
    upper = math.inf if rho.mass(0.0, math.inf, C) > 0 else 0.0
    mean = rho.cumulant(0.0, C).dlam
    xs = np.linspace(max(lower, mean - 3) + 0.05, min(upper, mean + 3) - 0.05, 60)
    res = [legendre_rate(rho, x, C) for x in xs]
    vals = np.array([r.value for r in res])
    assert np.all(vals >= 0)
    assert np.all(np.diff(vals, 2) >= -1e-9)
    interior = [r for r in res if r.status == INTERIOR]
    thetas = [r.theta_star for r in interior]
    assert np.all(np.diff(thetas) > 0)
    for r in interior:
        assert abs(rho.cumulant(r.theta_star, C).dlam - r.x) <= 1e-10 * max(1.0, abs(r.x))
    assert legendre_rate(rho, mean, C).value <= 1e-10


def test_boundary_for_truncation():
    rho = Atoms([1.0, 5.0], [0.5, 0.5])
    # cutting at C=2 leaves only the atom at 1 with mass 1/2
    r = legendre_rate(rho, 0.0, C=2.0)
    assert r.value == pytest.approx(0.5) and r.status == BOUNDARY
    assert legendre_rate(rho, 0.9, C=2.0).status == INTERIOR
