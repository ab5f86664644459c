"""Limit measures and the truncated cumulant functional.

For a measure ``rho`` with all exponential moments finite and a cutoff
``C`` (possibly infinite)::

    Lambda_C(theta) = integral over |y| <= C of (exp(theta*y) - 1) rho(dy)

Every measure here evaluates ``Lambda_C`` and its first two derivatives in
closed form or as a finite sum, so there is no quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .additive import EmpiricalMeasure
from .errors import DomainError, NumericError

EXP_LIMIT = 700.0


@dataclass(frozen=True)
class CumulantValue:
    lam: float
    dlam: float
    d2lam: float


def _check_cutoff(C):
    if not C > 0:
        raise DomainError(f"cutoff C must be positive, got {C}")


class LimitMeasure:
    """Interface shared by all limit measures."""

    kind = ""

    def cumulant(self, theta: float, C: float = math.inf) -> CumulantValue:
        raise NotImplementedError

    def moment(self, k: int, C: float = math.inf) -> float:
        raise NotImplementedError

    def support_bounds(self, C: float = math.inf) -> tuple[float, float]:
        """Smallest and largest points of the support within ``[-C, C]``."""
        raise NotImplementedError

    def mass(self, lo: float, hi: float, C: float = math.inf) -> float:
        """``rho`` of the open interval ``(lo, hi)`` intersected with ``[-C, C]``."""
        raise NotImplementedError

    def theta_max(self, C: float = math.inf) -> float:
        """Largest positive ``theta`` at which the cumulant evaluates without overflow."""
        raise NotImplementedError

    def theta_min(self, C: float = math.inf) -> float:
        """Most negative safe ``theta``; symmetric unless a family overrides it."""
        return -self.theta_max(C)

    def _guard(self, theta: float, C: float) -> None:
        if theta > self.theta_max(C) or theta < self.theta_min(C):
            raise NumericError(f"cumulant overflows at theta={theta}; safe range is "
                               f"[{self.theta_min(C):.6g}, {self.theta_max(C):.6g}]")

    def to_json(self) -> dict:
        raise NotImplementedError


class Atoms(LimitMeasure):
    """Finitely many atoms ``sum_i w_i delta_{y_i}``."""

    kind = "atoms"

    def __init__(self, values, weights):
        values = np.asarray(values, dtype=np.float64)
        weights = np.asarray(weights, dtype=np.float64)
        if values.shape != weights.shape or values.ndim != 1 or len(values) == 0:
            raise DomainError("atoms need matching non-empty value and weight lists")
        if not np.all(np.isfinite(values)) or not np.all(weights > 0):
            raise DomainError("atom values must be finite and weights positive")
        if abs(math.fsum(weights) - 1.0) > 1e-12:
            raise DomainError(f"atom weights sum to {math.fsum(weights)!r}, not 1")
        order = np.argsort(values, kind="stable")
        self.values = values[order]
        self.weights = weights[order]
        self.values.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def from_empirical(cls, rho: EmpiricalMeasure) -> "Atoms":
        return cls(rho.values, rho.weights)

    def __repr__(self):
        return f"Atoms({self.values.tolist()}, {self.weights.tolist()})"

    def _restrict(self, C):
        _check_cutoff(C)
        keep = np.abs(self.values) <= C
        return self.values[keep], self.weights[keep]

    def cumulant(self, theta, C=math.inf):
        y, w = self._restrict(C)
        self._guard(theta, C)
        e = np.exp(theta * y)
        return CumulantValue(math.fsum(w * np.expm1(theta * y)), math.fsum(w * y * e),
                             math.fsum(w * y * y * e))

    def moment(self, k, C=math.inf):
        y, w = self._restrict(C)
        return math.fsum(w * y**k)

    def support_bounds(self, C=math.inf):
        y, _ = self._restrict(C)
        if len(y) == 0:
            return (0.0, 0.0)
        return (float(y[0]), float(y[-1]))

    def mass(self, lo, hi, C=math.inf):
        y, w = self._restrict(C)
        return math.fsum(w[(y > lo) & (y < hi)])

    def theta_max(self, C=math.inf):
        y, _ = self._restrict(C)
        top = float(np.max(y)) if len(y) else 0.0
        # y**2 * e^(theta*y) must stay finite too
        return (EXP_LIMIT - 2 * math.log(max(1.0, top))) / top if top > 0 else math.inf

    def theta_min(self, C=math.inf):
        y, _ = self._restrict(C)
        bottom = float(np.min(y)) if len(y) else 0.0
        return (EXP_LIMIT - 2 * math.log(max(1.0, -bottom))) / bottom if bottom < 0 else -math.inf

    def to_json(self):
        return {"kind": self.kind, "atoms": [[v, w] for v, w in zip(self.values.tolist(), self.weights.tolist())]}


class Poisson(LimitMeasure):
    kind = "poisson"

    def __init__(self, lam: float):
        if not (lam > 0 and math.isfinite(lam)):
            raise DomainError(f"Poisson parameter must be positive, got {lam}")
        self.lam = float(lam)

    def __repr__(self):
        return f"Poisson({self.lam})"

    def _kmax(self, theta):
        # tilted law is Poisson(lam*e^theta); its tail beyond this is below 1e-16 relative
        mu = self.lam * math.exp(theta)
        return int(mu + 12.0 * math.sqrt(mu) + 60)

    def cumulant(self, theta, C=math.inf):
        _check_cutoff(C)
        self._guard(theta, C)
        lam = self.lam
        if math.isinf(C) or C >= self._kmax(theta):
            et = math.exp(theta)
            big = math.exp(lam * math.expm1(theta))
            return CumulantValue(math.expm1(lam * math.expm1(theta)), lam * et * big,
                                 lam * et * big * (1 + lam * et))
        k = np.arange(0, int(math.floor(C)) + 1, dtype=np.float64)
        logp = stats.poisson.logpmf(k, lam)
        e = np.exp(logp + theta * k)
        p = np.exp(logp)
        return CumulantValue(math.fsum(e - p), math.fsum(k * e), math.fsum(k * k * e))

    def moment(self, k, C=math.inf):
        _check_cutoff(C)
        if math.isinf(C) or C >= self._kmax(0.0):
            return {1: self.lam, 2: self.lam + self.lam**2}[k]
        ks = np.arange(0, int(math.floor(C)) + 1, dtype=np.float64)
        return math.fsum(stats.poisson.pmf(ks, self.lam) * ks**k)

    def support_bounds(self, C=math.inf):
        return (0.0, float(math.floor(C)) if math.isfinite(C) else math.inf)

    def mass(self, lo, hi, C=math.inf):
        a = math.floor(lo) + 1 if lo >= 0 else 0
        top = min(hi, math.floor(C) + 1 if math.isfinite(C) else math.inf)
        if math.isinf(top):
            return float(stats.poisson.sf(a - 1, self.lam))
        b = math.ceil(top) - 1
        if b < a:
            return 0.0
        return float(stats.poisson.cdf(b, self.lam) - stats.poisson.cdf(a - 1, self.lam))

    def theta_max(self, C=math.inf):
        # the second derivative (mu + mu^2) * exp(mu - lam), mu = lam*e^theta, stays finite
        return math.log1p((EXP_LIMIT - 2 * math.log1p(EXP_LIMIT + self.lam)) / self.lam)

    def theta_min(self, C=math.inf):
        return -math.inf

    def to_json(self):
        return {"kind": self.kind, "lambda": self.lam}


class Binomial(LimitMeasure):
    """Binomial(n, beta) on ``{0, ..., n}``."""

    kind = "binomial"

    def __init__(self, n: int, beta: float):
        if int(n) != n or n < 1 or not 0 < beta < 1:
            raise DomainError(f"need integer n >= 1 and 0 < beta < 1, got n={n}, beta={beta}")
        self.n = int(n)
        self.beta = float(beta)
        k = np.arange(self.n + 1)
        self._atoms = Atoms(k, stats.binom.pmf(k, self.n, self.beta) / math.fsum(stats.binom.pmf(k, self.n, self.beta)))

    def __repr__(self):
        return f"Binomial({self.n}, {self.beta})"

    def cumulant(self, theta, C=math.inf):
        _check_cutoff(C)
        if C < self.n:
            return self._atoms.cumulant(theta, C)
        self._guard(theta, C)
        n, b = self.n, self.beta
        et = math.exp(theta)
        base = 1 - b + b * et
        lam = math.expm1(n * math.log1p(b * math.expm1(theta)))
        d1 = n * base ** (n - 1) * b * et
        d2 = d1 + (n * (n - 1) * base ** (n - 2) * (b * et) ** 2 if n > 1 else 0.0)
        return CumulantValue(lam, d1, d2)

    def moment(self, k, C=math.inf):
        return self._atoms.moment(k, C)

    def support_bounds(self, C=math.inf):
        return self._atoms.support_bounds(C)

    def mass(self, lo, hi, C=math.inf):
        return self._atoms.mass(lo, hi, C)

    def theta_max(self, C=math.inf):
        return self._atoms.theta_max(C)

    def theta_min(self, C=math.inf):
        return -math.inf

    def to_json(self):
        return {"kind": self.kind, "n": self.n, "beta": self.beta}


def _interval_prob(a, b):
    """Standard normal probability of ``[a, b]`` without cancellation in either tail."""
    if a > 0:
        return special.ndtr(-a) - special.ndtr(-b)
    return special.ndtr(b) - special.ndtr(a)


class Gaussian(LimitMeasure):
    """Standard normal.

    Truncated integrals use the shift ``y = z + theta`` under the Gaussian
    weight, which turns each of them into normal probabilities and
    densities at ``-C - theta`` and ``C - theta``.
    """

    kind = "gaussian"

    def __repr__(self):
        return "Gaussian()"

    def cumulant(self, theta, C=math.inf):
        _check_cutoff(C)
        self._guard(theta, C)
        g = math.exp(0.5 * theta * theta)
        if math.isinf(C):
            return CumulantValue(math.expm1(0.5 * theta * theta), theta * g, (1 + theta * theta) * g)
        a, b = -C - theta, C - theta
        P = _interval_prob(a, b)
        pa, pb = stats.norm.pdf(a), stats.norm.pdf(b)
        base = _interval_prob(-C, C)
        lam = g * P - base
        d1 = g * (theta * P + pa - pb)
        d2 = g * ((1 + theta * theta) * P + 2 * theta * (pa - pb) + a * pa - b * pb)
        return CumulantValue(float(lam), float(d1), float(d2))

    def moment(self, k, C=math.inf):
        _check_cutoff(C)
        if k == 1:
            return 0.0
        if math.isinf(C):
            return 1.0
        return float(_interval_prob(-C, C) - 2 * C * stats.norm.pdf(C))

    def support_bounds(self, C=math.inf):
        return (-C, C)

    def mass(self, lo, hi, C=math.inf):
        lo, hi = max(lo, -C), min(hi, C)
        return float(_interval_prob(lo, hi)) if hi > lo else 0.0

    def theta_max(self, C=math.inf):
        return math.sqrt(2 * EXP_LIMIT) - 1.0

    def to_json(self):
        return {"kind": self.kind}


def measure_from_json(obj: dict) -> LimitMeasure:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("measure needs a 'kind' field")
    kind = obj["kind"]
    if kind == "atoms":
        pairs = obj["atoms"]
        return Atoms([v for v, _ in pairs], [w for _, w in pairs])
    if kind == "poisson":
        return Poisson(float(obj["lambda"]))
    if kind == "binomial":
        return Binomial(int(obj["n"]), float(obj["beta"]))
    if kind == "gaussian":
        return Gaussian()
    if kind == "empirical":
        # {"kind": "empirical", "g": {...}, "n": N} is resolved by the caller, which owns the prime table
        raise ValueError("empirical measures must be built with empirical_rho")
    raise ValueError(f"unknown measure kind {kind!r}; expected atoms|poisson|binomial|gaussian|empirical")


def cumulant(rho: LimitMeasure | EmpiricalMeasure, theta: float, C: float = math.inf) -> CumulantValue:
    """``Lambda_C(theta)`` with first and second derivatives."""
    if isinstance(rho, EmpiricalMeasure):
        rho = Atoms.from_empirical(rho)
    return rho.cumulant(float(theta), C)


def measure_moment(rho: LimitMeasure | EmpiricalMeasure, k: int, C: float = math.inf) -> float:
    """Truncated moment ``integral over |y| <= C of y**k rho(dy)`` for ``k`` in {1, 2}."""
    if k not in (1, 2):
        raise DomainError(f"k must be 1 or 2, got {k}")
    if isinstance(rho, EmpiricalMeasure):
        rho = Atoms.from_empirical(rho)
    return rho.moment(k, C)
