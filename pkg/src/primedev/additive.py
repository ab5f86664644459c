"""Strongly additive functions and the prime-weighted measures they induce.

A strongly additive ``g`` is fixed by its values on primes; ``g(m)`` is the
sum of ``g(p)`` over the distinct primes dividing ``m``. The measure
``rho_n`` puts weight proportional to ``1/p`` on the value ``g(p)`` for each
prime ``p <= n``.
"""

from __future__ import annotations

import bisect
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError, InfeasibleError
from .primes import PrimeTable, factorize, mertens_sums


def _finite(*vals):
    for v in vals:
        if not math.isfinite(v):
            raise DomainError(f"g values must be finite, got {v}")


class AdditiveFunctionSpec:
    """Base class; subclasses implement :meth:`on_primes`."""

    kind: str = ""
    #: values of g compare exactly (parametric) or up to 1e-12 (tables)
    merge_tol: float = 0.0
    needs_index: bool = False

    def on_primes(self, primes: np.ndarray) -> np.ndarray:
        """Values of ``g`` on ``primes``, which must be the first ``len(primes)`` primes in order."""
        raise NotImplementedError

    def at_prime(self, p: int, index: int) -> float:
        """``g(p)`` for the prime ``p`` that is the ``index``-th prime (1-based)."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def scaled(self, c: float) -> "AdditiveFunctionSpec":
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(AdditiveFunctionSpec):
    """``g(p) = lam`` for every prime; ``lam = 1`` counts distinct prime factors."""

    lam: float = 1.0
    kind = "constant"

    def __post_init__(self):
        _finite(self.lam)

    def on_primes(self, primes):
        return np.full(len(primes), float(self.lam))

    def at_prime(self, p, index):
        return float(self.lam)

    def to_json(self):
        return {"kind": self.kind, "lambda": self.lam}

    def scaled(self, c):
        return Constant(c * self.lam)


@dataclass(frozen=True)
class TwoValueByIndex(AdditiveFunctionSpec):
    """``g(p_k) = lam1`` for odd ``k`` and ``lam2`` for even ``k`` (``p_1 = 2``)."""

    lam1: float
    lam2: float
    kind = "two_value_by_index"
    needs_index = True

    def __post_init__(self):
        _finite(self.lam1, self.lam2)

    def on_primes(self, primes):
        out = np.full(len(primes), float(self.lam1))
        out[1::2] = self.lam2
        return out

    def at_prime(self, p, index):
        return float(self.lam1 if index % 2 == 1 else self.lam2)

    def to_json(self):
        return {"kind": self.kind, "lambda1": self.lam1, "lambda2": self.lam2}

    def scaled(self, c):
        return TwoValueByIndex(c * self.lam1, c * self.lam2)


@dataclass(frozen=True)
class IntervalOscillating(AdditiveFunctionSpec):
    """``lam1`` on ``(a_{2k}, a_{2k+1}]`` and ``lam2`` on ``(a_{2k+1}, a_{2k+2}]``.

    ``breakpoints`` lists ``a_1 < a_2 < ...``; ``a_0 = 0`` is implicit and the
    alternation continues past the last breakpoint.
    """

    lam1: float
    lam2: float
    breakpoints: tuple[int, ...]
    kind = "interval_oscillating"

    def __post_init__(self):
        _finite(self.lam1, self.lam2)
        object.__setattr__(self, "breakpoints", tuple(int(a) for a in self.breakpoints))
        if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if self.breakpoints and self.breakpoints[0] <= 0:
            raise DomainError("breakpoints must be positive")

    def _segment(self, p):
        return bisect.bisect_left(self.breakpoints, p)

    def on_primes(self, primes):
        seg = np.searchsorted(np.asarray(self.breakpoints, dtype=np.int64), primes, side="left")
        return np.where(seg % 2 == 0, float(self.lam1), float(self.lam2))

    def at_prime(self, p, index):
        return float(self.lam1 if self._segment(p) % 2 == 0 else self.lam2)

    def to_json(self):
        return {"kind": self.kind, "lambda1": self.lam1, "lambda2": self.lam2,
                "breakpoints": list(self.breakpoints)}

    def scaled(self, c):
        return IntervalOscillating(c * self.lam1, c * self.lam2, self.breakpoints)


@dataclass(frozen=True)
class Table(AdditiveFunctionSpec):
    """Explicit values on listed primes, ``default`` elsewhere."""

    values: dict = field(default_factory=dict)
    default: float = 0.0
    kind = "table"
    merge_tol = 1e-12

    def __post_init__(self):
        vals = {int(p): float(v) for p, v in self.values.items()}
        _finite(self.default, *vals.values())
        object.__setattr__(self, "values", vals)

    def __hash__(self):
        return hash((tuple(sorted(self.values.items())), self.default))

    def on_primes(self, primes):
        out = np.full(len(primes), float(self.default))
        if self.values:
            keys = np.fromiter(self.values, dtype=np.int64)
            vals = np.fromiter(self.values.values(), dtype=np.float64)
            pos = np.searchsorted(primes, keys)
            hit = (pos < len(primes)) & (primes[np.minimum(pos, len(primes) - 1)] == keys)
            out[pos[hit]] = vals[hit]
        return out

    def at_prime(self, p, index):
        return self.values.get(int(p), float(self.default))

    def to_json(self):
        return {"kind": self.kind, "values": {str(p): v for p, v in sorted(self.values.items())},
                "default": self.default}

    def scaled(self, c):
        return Table({p: c * v for p, v in self.values.items()}, c * self.default)


_KINDS = {
    "constant": lambda d: Constant(float(d["lambda"])),
    "two_value_by_index": lambda d: TwoValueByIndex(float(d["lambda1"]), float(d["lambda2"])),
    "interval_oscillating": lambda d: IntervalOscillating(
        float(d["lambda1"]), float(d["lambda2"]), tuple(d["breakpoints"])),
    "table": lambda d: Table({int(p): float(v) for p, v in d.get("values", {}).items()},
                             float(d.get("default", 0.0))),
}


def spec_from_json(obj: dict) -> AdditiveFunctionSpec:
    """Decode ``{"kind": ..., ...}``; raises ``KeyError``/``ValueError`` naming the problem."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("additive function needs a 'kind' field")
    kind = obj["kind"]
    if kind not in _KINDS:
        raise ValueError(f"unknown additive function kind {kind!r}; expected one of {sorted(_KINDS)}")
    return _KINDS[kind](obj)


def g_eval(spec: AdditiveFunctionSpec, m: int, table: PrimeTable) -> float:
    """``g(m)``: the sum of ``g(p)`` over distinct primes ``p | m``; ``g(1) = 0``."""
    total = 0.0
    for p, _ in factorize(m, table):
        if p <= table.limit:
            index = table.index_of(p)
        elif spec.needs_index:
            raise CapacityError(f"index of prime {p} unknown beyond table limit {table.limit}")
        else:
            index = 0
        total += spec.at_prime(p, index)
    return total


def prime_values(spec: AdditiveFunctionSpec, table: PrimeTable, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Primes ``p <= n`` and the matching ``g(p)``."""
    primes = table.primes_upto(n)
    return primes, spec.on_primes(primes)


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Finite atoms ``(value, weight)`` sorted by value; ``normalizer`` is the sum of ``1/p``."""

    values: np.ndarray
    weights: np.ndarray
    normalizer: float

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.weights.tolist()))

    def moment(self, k: int) -> float:
        return math.fsum(self.weights * self.values**k)


def empirical_rho(spec: AdditiveFunctionSpec, table: PrimeTable, n: int) -> EmpiricalMeasure:
    """The prime-weighted distribution of ``g(p)`` over primes ``p <= n``."""
    primes, vals = prime_values(spec, table, n)
    if len(primes) == 0:
        raise DomainError(f"no primes <= {n}")
    recip = 1.0 / primes.astype(np.float64)
    order = np.argsort(vals, kind="stable")
    vals, recip = vals[order], recip[order]
    if spec.merge_tol:
        # a new group starts wherever the value moves more than tol from the group's first value
        starts = [0]
        for i in range(1, len(vals)):
            if vals[i] - vals[starts[-1]] > spec.merge_tol:
                starts.append(i)
        starts = np.asarray(starts)
    else:
        starts = np.flatnonzero(np.concatenate(([True], vals[1:] != vals[:-1])))
    ends = np.append(starts[1:], len(vals))
    norm = mertens_sums(table, n).total
    mass = np.array([math.fsum(recip[a:b]) for a, b in zip(starts, ends)])
    return EmpiricalMeasure(vals[starts].copy(), mass / norm, norm)


@dataclass(frozen=True)
class ModerateScaling:
    mu_n: float
    sigma2_n: float
    a_n: float

    @property
    def sigma_n(self) -> float:
        return math.sqrt(self.sigma2_n)

    @property
    def speed(self) -> float:
        return self.a_n**2 / self.sigma2_n


def mu_sigma(spec: AdditiveFunctionSpec, table: PrimeTable, n: int, a_n: float | None = None) -> ModerateScaling:
    """Centering ``sum g(p)/p`` and variance proxy ``sum g(p)^2/p`` over ``p <= n``.

    ``a_n`` defaults to ``sigma_n**1.5``, midway (on a log scale) between the
    CLT scale ``sigma_n`` and the large-deviation scale ``sigma_n**2``.
    """
    primes, vals = prime_values(spec, table, n)
    recip = 1.0 / primes.astype(np.float64)
    mu = math.fsum(vals * recip)
    s2 = math.fsum(vals * vals * recip)
    if s2 == 0.0:
        raise DomainError("g vanishes on all primes <= n; moderate scaling is degenerate")
    sigma = math.sqrt(s2)
    if a_n is None:
        a_n = sigma**1.5
    elif not sigma <= a_n <= s2:
        warnings.warn(f"a_n={a_n:.6g} outside [sigma_n, sigma_n^2] = [{sigma:.6g}, {s2:.6g}]",
                      stacklevel=2)
    return ModerateScaling(mu, s2, float(a_n))


@dataclass(frozen=True)
class CounterexampleSchedule:
    """Breakpoints ``u_k`` in the Mertens coordinate and the normalized cumulant there."""

    breakpoints: np.ndarray
    cumulants: np.ndarray
    low_level: float
    high_level: float
    delta: float

    def satisfied(self) -> np.ndarray:
        """Per-breakpoint truth of the alternating inequality."""
        k = np.arange(1, len(self.breakpoints) + 1)
        low_ok = self.cumulants <= self.low_level + self.delta
        high_ok = self.cumulants >= self.high_level - self.delta
        return np.where(k % 2 == 1, low_ok, high_ok)


def oscillating_cumulant(u: float, breakpoints, lam1: float, lam2: float, theta: float) -> float:
    """``(1/u) * integral_0^u (exp(theta g(s)) - 1) ds`` for the piecewise ``g``
    equal to ``lam1`` on odd segments ``(u_{2j}, u_{2j+1}]`` and ``lam2`` on even ones."""
    c = (math.expm1(theta * lam1), math.expm1(theta * lam2))
    acc, prev = 0.0, 0.0
    for j, b in enumerate(breakpoints):
        hi = min(u, b)
        if hi > prev:
            acc += c[j % 2] * (hi - prev)
        prev = b
        if b >= u:
            break
    else:
        if u > prev:
            acc += c[len(breakpoints) % 2] * (u - prev)
    return acc / u


def counterexample_schedule(lam1: float, lam2: float, delta: float, theta: float,
                            K: int = 6, u1: float = 1.0) -> CounterexampleSchedule:
    """Breakpoints making the normalized cumulant oscillate between two levels.

    Works in the coordinate ``u = sum_{p <= x} 1/p``. The first segment
    carries ``lam1`` up to ``u1``; each later segment carries the other
    value and ends as soon as the running average has crossed within
    ``delta`` of that value's level ``exp(theta * lam) - 1``.
    """
    if not (0 < lam1 < lam2) or delta <= 0 or theta <= 0:
        if lam1 == lam2:
            raise InfeasibleError("lam1 == lam2: no oscillation possible")
        raise DomainError("need 0 < lam1 < lam2, delta > 0, theta > 0")
    lo, hi = math.expm1(theta * lam1), math.expm1(theta * lam2)
    if delta >= (hi - lo) / 2:
        raise InfeasibleError(f"delta={delta} >= half the gap {(hi - lo) / 2:.6g} between levels")
    us = [float(u1)]
    area = lo * u1
    for k in range(2, K + 1):
        level, target = (hi, hi - delta) if k % 2 == 0 else (lo, lo + delta)
        u_prev = us[-1]
        # area + level*(u - u_prev) = target*u
        u = (area - level * u_prev) / (target - level)
        # nudge past rounding so the inequality holds for the value we report
        while True:
            avg = oscillating_cumulant(u, us + [u], lam1, lam2, theta)
            if (avg >= target) if k % 2 == 0 else (avg <= target):
                break
            u = float(np.nextafter(u, math.inf))
        area += level * (u - u_prev)
        us.append(float(u))
    bps = np.asarray(us)
    cums = np.array([oscillating_cumulant(u, us, lam1, lam2, theta) for u in us])
    return CounterexampleSchedule(bps, cums, lo, hi, float(delta))
