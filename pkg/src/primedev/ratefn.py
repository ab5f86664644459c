"""Rate functions: numeric Legendre transforms, closed forms and Lambert W.

The large-deviation rate for a limit measure ``rho`` is::

    I(x) = sup_theta { theta*x - Lambda(theta) },
    Lambda(theta) = integral of (exp(theta*y) - 1) rho(dy)

:func:`legendre_rate` computes it for any :class:`~primedev.measures.LimitMeasure`
by solving ``Lambda'(theta) = x``. :class:`ClosedForm` evaluates the
explicit formulas available for point masses, the two-atom measure
``(delta_l + delta_2l)/2``, Poisson, Binomial and Gaussian limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .additive import EmpiricalMeasure
from .errors import DomainError, NumericError
from .measures import Atoms, Binomial, Gaussian, LimitMeasure, Poisson

INTERIOR = "interior"
BOUNDARY = "boundary"
INFINITE = "infinite"

_BRANCH = -1.0 / math.e


@dataclass(frozen=True)
class RateFunctionResult:
    x: float
    value: float
    theta_star: float | None
    iterations: int = 0
    status: str = INTERIOR


def _lambert_w_scalar(z: float) -> float:
    if z == 0.0:
        return 0.0
    if z < _BRANCH:
        if z > _BRANCH - 1e-15:
            return -1.0
        raise DomainError(f"lambert_w is real only for z >= -1/e, got {z}")
    if math.isinf(z):
        return math.inf
    if z < -0.25:
        # series about the branch point
        p = math.sqrt(max(0.0, 2.0 * (math.e * z + 1.0)))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif z < math.e:
        w = math.log1p(z) * (1.0 - math.log1p(math.log1p(z)) / (2.0 + math.log1p(z)))
    else:
        L1 = math.log(z)
        L2 = math.log(L1)
        w = L1 - L2 + L2 / L1
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - z
        if f == 0.0:
            break
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if w_new < -1.0:
            w_new = (w - 1.0) / 2.0
        if abs(w_new - w) <= 4e-16 * (1.0 + abs(w_new)):
            w = w_new
            break
        w = w_new
    return w


def lambert_w(z):
    """Principal real branch of Lambert W: the ``w >= -1`` solving ``w*exp(w) = z``.

    Accepts a scalar or an array; ``z`` must be at least ``-1/e``.
    """
    if np.ndim(z) == 0:
        return _lambert_w_scalar(float(z))
    z = np.asarray(z, dtype=np.float64)
    return np.vectorize(_lambert_w_scalar, otypes=[np.float64])(z)


def _as_measure(rho):
    if isinstance(rho, EmpiricalMeasure):
        return Atoms.from_empirical(rho)
    return rho


def legendre_rate(rho: LimitMeasure | EmpiricalMeasure, x: float, C: float = math.inf,
                  tol: float = 1e-12, max_iter: int = 200) -> RateFunctionResult:
    """``sup_theta {theta*x - Lambda_C(theta)}`` for the measure truncated to ``[-C, C]``.

    Interior points solve ``Lambda_C'(theta) = x`` by Newton's method with
    steps clamped to length 2 and a bisection fallback. When the truncated
    measure sits on one side of zero, ``Lambda_C'`` only covers a half-line:
    beyond it the rate is infinite, and at its endpoint 0 the supremum is
    the limit ``theta -> -/+ infinity``, i.e. the mass of the nonzero atoms.
    """
    rho = _as_measure(rho)
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x}")
    pos = rho.mass(0.0, math.inf, C)
    neg = rho.mass(-math.inf, 0.0, C)
    lower = -math.inf if neg > 0 else 0.0
    upper = math.inf if pos > 0 else 0.0
    if x < lower or x > upper:
        return RateFunctionResult(x, math.inf, None, 0, INFINITE)
    if x == lower == upper:
        return RateFunctionResult(x, 0.0, 0.0, 0, BOUNDARY)
    if x == lower:
        return RateFunctionResult(x, pos, -math.inf, 0, BOUNDARY)
    if x == upper:
        return RateFunctionResult(x, neg, math.inf, 0, BOUNDARY)

    scale = max(1.0, abs(x))
    theta = 0.0
    cv = rho.cumulant(theta, C)
    if cv.dlam == x:
        return RateFunctionResult(x, 0.0, 0.0, 0, INTERIOR)
    # bracket [a, b] with Lambda'(a) < x < Lambda'(b)
    direction = 1.0 if cv.dlam < x else -1.0
    tmax = rho.theta_max(C) if direction > 0 else -rho.theta_min(C)
    a = b = 0.0
    step = 1.0
    iterations = 0
    while True:
        iterations += 1
        t = direction * min(step, tmax)
        d = rho.cumulant(t, C).dlam
        if (d >= x) if direction > 0 else (d <= x):
            break
        if step >= tmax:
            raise NumericError(f"x={x} needs |theta| beyond the overflow guard {tmax:.6g}")
        if direction > 0:
            a = t
        else:
            b = t
        step *= 2.0
    if direction > 0:
        b = t
    else:
        a = t

    while iterations < max_iter:
        iterations += 1
        resid = cv.dlam - x
        if abs(resid) <= tol * scale:
            break
        if resid < 0:
            a = max(a, theta)
        else:
            b = min(b, theta)
        newton = theta - resid / cv.d2lam if cv.d2lam > 0 else math.nan
        if math.isfinite(newton) and abs(newton - theta) <= 2.0 and a < newton < b:
            theta_new = newton
        elif math.isfinite(newton) and a < theta + math.copysign(2.0, newton - theta) < b:
            theta_new = theta + math.copysign(2.0, newton - theta)
        else:
            theta_new = 0.5 * (a + b)
        if theta_new == theta or b - a <= 4 * np.spacing(max(abs(a), abs(b))):
            # bracket is down to a few ulps
            cv = rho.cumulant(theta_new, C)
            theta = theta_new
            if abs(cv.dlam - x) <= 1e-10 * scale:
                break
            raise NumericError(f"stalled at theta in [{a!r}, {b!r}] with residual {cv.dlam - x:.3g}")
        theta = theta_new
        cv = rho.cumulant(theta, C)
    else:
        raise NumericError(f"no convergence after {max_iter} iterations; bracket [{a!r}, {b!r}]")
    value = theta * x - cv.lam
    # theta = 0 already gives 0, so the supremum is never negative
    return RateFunctionResult(x, max(value, 0.0), theta, iterations, INTERIOR)


def mdp_rate(x: float) -> float:
    """Moderate-deviation rate ``x**2 / 2``."""
    return 0.5 * x * x


def _xlogx_ratio(x, a):
    """``x*log(x/a)`` with the ``x -> 0`` limit."""
    return 0.0 if x == 0 else x * math.log(x / a)


def rate_constant(lam: float, x: float) -> RateFunctionResult:
    """Point mass at ``lam``: ``(x/lam) log(x/lam) - x/lam + 1`` for ``x >= 0``."""
    if x < 0:
        return RateFunctionResult(x, math.inf, None, status=INFINITE)
    if x == 0:
        return RateFunctionResult(x, 1.0, -math.inf, status=BOUNDARY)
    r = x / lam
    return RateFunctionResult(x, r * math.log(r) - r + 1.0, math.log(r) / lam)


def rate_two_atom_ratio2(lam1: float, x: float) -> RateFunctionResult:
    """``rho = (delta_{lam1} + delta_{2 lam1}) / 2``.

    With ``t = (-lam1 + sqrt(lam1**2 + 16 lam1 x)) / (4 lam1) = exp(lam1 theta*)``,
    ``I(x) = (x/lam1) log t + 1 - t/2 - t**2/2``.
    """
    if x < 0:
        return RateFunctionResult(x, math.inf, None, status=INFINITE)
    if x == 0:
        return RateFunctionResult(x, 1.0, -math.inf, status=BOUNDARY)
    # rationalized numerator avoids cancellation for small x
    t = 4.0 * x / (lam1 + math.sqrt(lam1 * lam1 + 16.0 * lam1 * x))
    value = (x / lam1) * math.log(t) + 1.0 - 0.5 * t - 0.5 * t * t
    return RateFunctionResult(x, value, math.log(t) / lam1)


def rate_poisson(lam: float, x: float) -> RateFunctionResult:
    """Poisson(lam): ``x log(W(x e^lam)/lam) + 1 - exp(W(x e^lam) - lam)``."""
    if x < 0:
        return RateFunctionResult(x, math.inf, None, status=INFINITE)
    if x == 0:
        return RateFunctionResult(x, -math.expm1(-lam), -math.inf, status=BOUNDARY)
    w = lambert_w(x * math.exp(lam))
    value = x * math.log(w / lam) - math.expm1(w - lam)
    return RateFunctionResult(x, value, math.log(w / lam))


def rate_binomial1(beta: float, x: float) -> RateFunctionResult:
    """Bernoulli(beta): ``x log(x/beta) + beta - x``."""
    if x < 0:
        return RateFunctionResult(x, math.inf, None, status=INFINITE)
    if x == 0:
        return RateFunctionResult(x, beta, -math.inf, status=BOUNDARY)
    return RateFunctionResult(x, _xlogx_ratio(x, beta) + beta - x, math.log(x / beta))


def rate_binomial2_printed(beta: float, x: float) -> RateFunctionResult:
    """Binomial(2, beta) expression in its published form.

    ``x log((-(1-beta) + sqrt((1-beta)**2 + x**2)) / beta) + 1 - (1-beta)**2 - x**2``.
    It does not solve ``x = 2 (1 - beta + beta e^theta) beta e^theta`` and
    disagrees with :func:`legendre_rate` on ``Binomial(2, beta)``; it is kept
    only so the two can be reported side by side.
    """
    if x < 0:
        return RateFunctionResult(x, math.inf, None, status=INFINITE)
    q = 1.0 - beta
    if x == 0:
        return RateFunctionResult(x, 1.0 - q * q, None, status=BOUNDARY)
    s = (-q + math.sqrt(q * q + x * x)) / beta
    return RateFunctionResult(x, x * math.log(s) + 1.0 - q * q - x * x, math.log(s))


def rate_gaussian(x: float) -> RateFunctionResult:
    """Standard normal: ``sqrt(W(x^2)) |x| + 1 - |x| / sqrt(W(x^2))``.

    Uses ``|x| / sqrt(W(x^2)) = exp(W(x^2)/2)``, so the last two terms are
    ``-expm1(W/2)`` and stay accurate near ``x = 0``. The rate is even in ``x``.
    """
    if x == 0:
        return RateFunctionResult(x, 0.0, 0.0)
    w = lambert_w(x * x)
    s = math.sqrt(w)
    return RateFunctionResult(x, s * abs(x) - math.expm1(0.5 * w), math.copysign(s, x))


@dataclass(frozen=True)
class ClosedForm:
    """A limit-measure family with an explicit rate function.

    ``family`` is one of ``constant`` (param ``lam``), ``two_atom_ratio2``
    (``lam1``), ``poisson`` (``lam``), ``binomial1`` (``beta``), ``binomial2``
    (``beta``, published expression) and ``gaussian``.
    """

    family: str
    param: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown closed-form family {self.family!r}")
        if self.family == "gaussian":
            return
        p = self.param
        if p is None or not math.isfinite(p) or p <= 0:
            raise DomainError(f"{self.family} needs a positive parameter, got {p}")
        if self.family.startswith("binomial") and not p < 1:
            raise DomainError(f"binomial beta must lie in (0, 1), got {p}")

    def rate(self, x: float) -> RateFunctionResult:
        fn = FAMILIES[self.family]
        return fn(float(x)) if self.family == "gaussian" else fn(self.param, float(x))

    def measure(self) -> LimitMeasure:
        f, p = self.family, self.param
        if f == "constant":
            return Atoms([p], [1.0])
        if f == "two_atom_ratio2":
            return Atoms([p, 2 * p], [0.5, 0.5])
        if f == "poisson":
            return Poisson(p)
        if f == "binomial1":
            return Binomial(1, p)
        if f == "binomial2":
            return Binomial(2, p)
        return Gaussian()

    @property
    def mean(self) -> float:
        """``Lambda'(0)``, where the rate vanishes."""
        return self.measure().moment(1)

    @property
    def asserted(self) -> bool:
        """Whether the closed form is expected to match the numeric transform."""
        return self.family != "binomial2"


FAMILIES = {
    "constant": rate_constant,
    "two_atom_ratio2": rate_two_atom_ratio2,
    "poisson": rate_poisson,
    "binomial1": rate_binomial1,
    "binomial2": rate_binomial2_printed,
    "gaussian": rate_gaussian,
}


def closed_form_rate(family: ClosedForm | str, x: float, param: float | None = None) -> RateFunctionResult:
    if isinstance(family, str):
        family = ClosedForm(family, param)
    return family.rate(x)


def closed_form_for(rho: LimitMeasure) -> ClosedForm | None:
    """The closed-form family matching ``rho`` exactly, if there is one."""
    if isinstance(rho, Gaussian):
        return ClosedForm("gaussian")
    if isinstance(rho, Poisson):
        return ClosedForm("poisson", rho.lam)
    if isinstance(rho, Binomial):
        if rho.n == 1:
            return ClosedForm("binomial1", rho.beta)
        if rho.n == 2:
            return ClosedForm("binomial2", rho.beta)
        return None
    if isinstance(rho, Atoms):
        v, w = rho.values, rho.weights
        if len(v) == 1 and v[0] > 0:
            return ClosedForm("constant", float(v[0]))
        if len(v) == 2 and v[0] > 0 and v[1] == 2 * v[0] and w[0] == w[1]:
            return ClosedForm("two_atom_ratio2", float(v[0]))
        if len(v) == 2 and v[0] == 0 and v[1] == 1:
            return ClosedForm("binomial1", float(w[1]))
    return None
