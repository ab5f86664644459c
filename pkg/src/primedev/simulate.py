"""The two probabilistic models behind ``g(V)`` and their exact laws.

* Divisibility model: ``V`` uniform on ``{1, ..., n}`` and ``S = sum_p g(p) Z_p``
  with ``Z_p = 1`` iff ``p | V``.
* Independent model: ``S~ = sum_{p <= Q} g(p) Y_p`` with independent
  ``Y_p ~ Bernoulli(1/p)``.

Both laws are computed exactly: the first by sieving every integer up to
``n``, the second by convolving the Bernoulli factors. Samplers, moment
comparisons, Chernoff bounds and empirical deviation rates build on these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.special import logsumexp

from .additive import AdditiveFunctionSpec, Constant, ModerateScaling, prime_values
from .errors import CapacityError, DomainError, UnsupportedSpecError
from .primes import PrimeTable, additive_sieve, build_prime_table, factorize, omega_sieve

TRIM = 1e-300
LATTICE_DENOMINATOR = 10**6
Z_GENERAL_BUDGET = 10**7
Z_OMEGA_BUDGET = 10**8


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Law on the lattice ``offset + i*step`` with mass ``probs[i]``.

    ``counts`` holds integer multiplicities when the law is an exact
    histogram over ``total`` equally likely outcomes.
    """

    offset: float
    step: float
    probs: np.ndarray
    counts: np.ndarray | None = None
    total: int | None = None

    @property
    def values(self) -> np.ndarray:
        return self.offset + self.step * np.arange(len(self.probs))

    def as_dict(self) -> dict[float, float]:
        return {float(v): float(p) for v, p in zip(self.values, self.probs) if p > 0}

    def mass(self) -> float:
        return math.fsum(self.probs)

    def mean(self) -> float:
        return math.fsum(self.values * self.probs)

    def moment(self, r: int) -> float:
        return math.fsum(self.values**r * self.probs)

    def _index(self, t, upper):
        # tolerate values that sit on the lattice up to rounding
        u = (t - self.offset) / self.step
        return math.ceil(u - 1e-9) if upper else math.floor(u + 1e-9)

    def tail_ge(self, t: float) -> float:
        """``P(S >= t)``."""
        if t == -math.inf:
            return self.mass()
        i = max(self._index(t, True), 0)
        return math.fsum(self.probs[i:]) if i < len(self.probs) else 0.0

    def tail_le(self, t: float) -> float:
        """``P(S <= t)``."""
        if t == math.inf:
            return self.mass()
        i = self._index(t, False)
        return math.fsum(self.probs[: i + 1]) if i >= 0 else 0.0

    def log_mgf(self, theta: float) -> float:
        """``log E[exp(theta*S)]`` computed from the mass array."""
        nz = self.probs > 0
        return float(logsumexp(theta * self.values[nz], b=self.probs[nz]))


def _trim(offset_idx: int, probs: np.ndarray, trim: float = TRIM):
    keep = np.flatnonzero(probs >= trim)
    if len(keep) == 0:
        raise DomainError("distribution lost all of its mass to trimming")
    return offset_idx + int(keep[0]), probs[keep[0] : keep[-1] + 1]


def lattice(values: np.ndarray, denominator: int = LATTICE_DENOMINATOR) -> tuple[Fraction, np.ndarray]:
    """Common step ``h`` and integer multipliers ``k`` with ``values == k*h``.

    Each value is matched to a fraction with denominator at most
    ``denominator``; values that are not such fractions to 1e-12 relative
    raise :class:`UnsupportedSpecError`.
    """
    distinct = np.unique(values)
    fracs = {}
    for v in distinct:
        f = Fraction(float(v)).limit_denominator(denominator)
        if abs(float(f) - v) > 1e-12 * max(1.0, abs(v)):
            raise UnsupportedSpecError(f"g value {v!r} is not on a rational lattice with denominator <= {denominator}")
        fracs[float(v)] = f
    nonzero = [f for f in fracs.values() if f != 0]
    if not nonzero:
        return Fraction(1), np.zeros(len(values), dtype=np.int64)
    den = reduce(math.lcm, (f.denominator for f in nonzero))
    num = reduce(math.gcd, (abs(f.numerator * (den // f.denominator)) for f in nonzero))
    h = Fraction(num, den)
    lookup = {v: int(f / h) for v, f in fracs.items()}
    k = np.array([lookup[float(v)] for v in values], dtype=np.int64)
    return h, k


def poisson_binomial_pmf(probs, trim: float = TRIM) -> np.ndarray:
    """Law of the number of successes among independent Bernoulli trials.

    The generating polynomial ``prod (1 - q + q z)`` is multiplied out
    pairwise in a balanced tree, each level as one batched convolution.
    Trailing coefficients below ``trim`` in every row are dropped. All
    arithmetic is on nonnegative numbers, so there is no cancellation.
    """
    q = np.asarray(probs, dtype=np.float64)
    if len(q) == 0:
        return np.ones(1)
    P = np.empty((len(q), 2))
    P[:, 0] = 1.0 - q
    P[:, 1] = q
    while len(P) > 1:
        if len(P) % 2:
            pad = np.zeros((1, P.shape[1]))
            pad[0, 0] = 1.0
            P = np.vstack([P, pad])
        A, B = P[0::2], P[1::2]
        d = A.shape[1]
        R = np.zeros((len(A), 2 * d - 1))
        for j in range(d):
            R[:, j : j + d] += A[:, j : j + 1] * B
        top = np.flatnonzero(R.max(axis=0) >= trim)
        P = R[:, : top[-1] + 1]
    return P[0]


def _dilate(pmf: np.ndarray, k: int) -> tuple[int, np.ndarray]:
    """Law of ``k*N`` on the integer lattice, as (offset index, mass array)."""
    out = np.zeros((len(pmf) - 1) * abs(k) + 1)
    out[:: abs(k)] = pmf
    if k > 0:
        return 0, out
    return -(len(out) - 1), out[::-1].copy()


def _b_primes(Q, spec, C, table):
    if Q < 2:
        raise DomainError(f"Q must be >= 2, got {Q}")
    if table is None or table.limit < Q:
        table = build_prime_table(Q, with_spf=False)
    primes, vals = prime_values(spec, table, Q)
    keep = np.abs(vals) <= C
    return primes[keep], vals[keep]


def exact_y_distribution(Q: int, spec: AdditiveFunctionSpec, C: float = math.inf,
                         table: PrimeTable | None = None) -> DiscreteDistribution:
    """Exact law of ``sum g(p) Y_p`` over primes ``p <= Q`` with ``|g(p)| <= C``.

    Primes sharing a lattice multiplier ``k`` form a Poisson-binomial count
    ``N_k``; the law is the convolution of the laws of ``k*N_k``.
    """
    primes, vals = _b_primes(Q, spec, C, table)
    h, k = lattice(vals)
    off, acc = 0, np.ones(1)
    for kv in np.unique(k):
        if kv == 0:
            continue
        group = primes[k == kv]
        o, pmf = _dilate(poisson_binomial_pmf(1.0 / group.astype(np.float64)), int(kv))
        acc = np.convolve(acc, pmf)
        off, acc = _trim(off + o, acc)
    return DiscreteDistribution(float(off * h), float(h), acc)


SERIES_SPLIT = 2**14
SERIES_MAX_RATIO = 0.25


class _ProductLogMGF:
    """``sum_p log1p(expm1(theta*g(p))/p)`` evaluated without a pass over every prime.

    Primes are grouped by value. Within a group, primes below
    ``SERIES_SPLIT`` are summed directly; the rest use
    ``log1p(c/p) = sum_k (-1)^(k+1) c^k p^-k / k`` with precomputed power
    sums, valid while ``|c| / SERIES_SPLIT <= SERIES_MAX_RATIO``. Larger ``|c|``
    falls back to the direct sum.
    """

    def __init__(self, primes: np.ndarray, vals: np.ndarray):
        self.groups = []
        for v in np.unique(vals):
            ps = primes[vals == v].astype(np.float64)
            head, tail = ps[ps < SERIES_SPLIT], ps[ps >= SERIES_SPLIT]
            sums = []
            if len(tail):
                inv = 1.0 / tail
                pw = inv.copy()
                while len(sums) < 200 and pw[0] > 1e-300:
                    sums.append(float(pw.sum()))
                    pw *= inv
            self.groups.append((float(v), 1.0 / head, 1.0 / tail, np.array(sums)))

    def __call__(self, theta):
        if np.ndim(theta) != 0:
            return np.array([self(float(t)) for t in np.asarray(theta).ravel()]).reshape(np.shape(theta))
        theta = float(theta)
        parts = []
        for v, rhead, rtail, sums in self.groups:
            c = math.expm1(theta * v)
            parts.extend(np.log1p(c * rhead))
            if len(rtail) == 0:
                continue
            if abs(c) / SERIES_SPLIT <= SERIES_MAX_RATIO:
                k = np.arange(1, len(sums) + 1)
                with np.errstate(under="ignore"):
                    terms = np.power(-c, k) * sums / k
                parts.extend(-terms)
            else:
                parts.extend(np.log1p(c * rtail))
        return math.fsum(parts)


def y_log_mgf(Q: int, spec: AdditiveFunctionSpec, C: float = math.inf, table: PrimeTable | None = None):
    """``theta -> log E[exp(theta * S~)]`` from the product formula, one factor per prime."""
    primes, vals = _b_primes(Q, spec, C, table)
    if len(np.unique(vals)) > 64:
        recip = 1.0 / primes.astype(np.float64)

        def K(theta):
            if np.ndim(theta) == 0:
                return math.fsum(np.log1p(np.expm1(float(theta) * vals) * recip))
            return np.array([K(float(t)) for t in np.asarray(theta).ravel()]).reshape(np.shape(theta))

        return K
    return _ProductLogMGF(primes, vals)


def _z_indices(N, spec, table):
    """Lattice step and per-integer multiplier of ``g(m)`` for ``m = 0..N``."""
    if isinstance(spec, Constant) and N <= Z_OMEGA_BUDGET:
        omega = omega_sieve(N, table)
        if spec.lam == 0:
            return Fraction(1), np.zeros(N + 1, dtype=np.int64)
        h, k = lattice(np.array([spec.lam]))
        return h, omega.astype(np.int64) * int(k[0])
    if N > Z_GENERAL_BUDGET:
        raise CapacityError(f"N={N} exceeds exact enumeration budget {Z_GENERAL_BUDGET} for general g")
    if table is None or table.limit < N:
        table = build_prime_table(N, with_spf=False)
    primes, vals = prime_values(spec, table, N)
    h, k = lattice(vals)
    return h, additive_sieve(primes, k, N, dtype=np.int64)


def exact_z_distribution(N: int, spec: AdditiveFunctionSpec, table: PrimeTable | None = None) -> DiscreteDistribution:
    """Exact law of ``g(V)`` for ``V`` uniform on ``{1, ..., N}``, by enumeration."""
    N = int(N)
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    h, idx = _z_indices(N, spec, table)
    idx = np.asarray(idx[1:], dtype=np.int64)
    lo = int(idx.min())
    counts = np.bincount(idx - lo)
    return DiscreteDistribution(float(lo * h), float(h), counts / N, counts=counts, total=N)


def exact_z_moment(dist: DiscreteDistribution, r: int, step: Fraction | None = None) -> Fraction:
    """``E[S^r]`` as an exact rational from the integer counts of a Z-model law."""
    if dist.counts is None:
        raise DomainError("exact moments need an enumerated distribution")
    h = step if step is not None else Fraction(dist.step).limit_denominator(LATTICE_DENOMINATOR)
    lo = round(Fraction(dist.offset) / h) if dist.offset else 0
    s = sum(int(c) * (lo + i) ** r for i, c in enumerate(dist.counts.tolist()) if c)
    return Fraction(s, dist.total) * h**r


@dataclass(frozen=True)
class JointMomentGap:
    z_moment: Fraction
    y_moment: Fraction
    gap: Fraction


def joint_moment_gap(n: int, primes) -> JointMomentGap:
    """``E[prod Z_p] = floor(n/P)/n`` against ``E[prod Y_p] = 1/P`` for ``P = prod p``."""
    primes = [int(p) for p in primes]
    if len(set(primes)) != len(primes):
        raise DomainError("primes must be distinct")
    P = math.prod(primes)
    if P >= 2**63:
        raise CapacityError(f"product of primes {P} exceeds 2**63")
    z = Fraction(n // P, n)
    y = Fraction(1, P)
    return JointMomentGap(z, y, y - z)


@dataclass(frozen=True)
class MomentGapRow:
    r: int
    z_moment: Fraction
    y_moment: Fraction | float
    gap: Fraction | float
    bound: Fraction
    passed: bool
    exact: bool = True


def _rational_y_law(ks, primes) -> dict[int, Fraction]:
    law = {0: Fraction(1)}
    for kv, p in zip(ks, primes):
        q = Fraction(1, int(p))
        new: dict[int, Fraction] = {}
        for s, w in law.items():
            new[s] = new.get(s, 0) + w * (1 - q)
            new[s + kv] = new.get(s + kv, 0) + w * q
        law = new
    return law


def moment_gap_bound_check(n: int, Q: int, C: float, r_max: int, spec: AdditiveFunctionSpec,
                           table: PrimeTable | None = None, rational_limit: int = 200) -> list[MomentGapRow]:
    """Compare ``E[S^r]`` (divisibility model) with ``E[S~^r]`` (independent model).

    Both sums run over primes ``p <= Q`` with ``|g(p)| <= C``. Each gap is
    checked against ``(C*Q)**r / n``. The divisibility side is an exact
    rational by enumeration of ``1..n``; the independent side is exact while
    there are at most ``rational_limit`` primes and a float DP otherwise.
    """
    n = int(n)
    if n > Z_GENERAL_BUDGET:
        raise CapacityError(f"n={n} exceeds exact enumeration budget {Z_GENERAL_BUDGET}")
    if Q > n:
        raise DomainError(f"Q={Q} must not exceed n={n}")
    if table is None or table.limit < n:
        table = build_prime_table(max(n, 2), with_spf=False)
    primes, vals = _b_primes(Q, spec, C, table)
    h, k = lattice(vals) if len(vals) else (Fraction(1), np.zeros(0, dtype=np.int64))
    s_idx = additive_sieve(primes, k, n, dtype=np.int64)[1:]
    lo = int(s_idx.min())
    counts = np.bincount(s_idx - lo).tolist()
    exact = len(primes) <= rational_limit
    if exact:
        law = _rational_y_law(k.tolist(), primes.tolist())
    else:
        ydist = exact_y_distribution(Q, spec, C, table)
    Cf = Fraction(C)
    rows = []
    for r in range(r_max + 1):
        zs = sum(c * (lo + i) ** r for i, c in enumerate(counts) if c)
        z = Fraction(zs, n) * h**r
        if exact:
            y = sum((w * s**r for s, w in law.items()), Fraction(0)) * h**r
            gap = abs(y - z)
        else:
            y = ydist.moment(r)
            gap = abs(y - float(z))
        bound = (Cf * Q) ** r / n
        rows.append(MomentGapRow(r, z, y, gap, bound, gap <= bound, exact))
    return rows


def chernoff_tail_bound(cumulant, threshold: float, theta_grid) -> float:
    """``min_theta exp(K(theta) - theta*threshold)`` over positive ``theta`` in the grid.

    ``K`` is the log moment generating function of the sum, so each term
    bounds ``P(S >= threshold)`` from above.
    """
    grid = np.asarray(theta_grid, dtype=np.float64)
    if grid.size == 0:
        raise DomainError("theta grid is empty")
    if np.any(grid <= 0):
        raise DomainError("upper-tail Chernoff bound needs positive theta")
    return chernoff_tail_bounds(cumulant, [threshold], grid)[0]


def chernoff_tail_bounds(cumulant, thresholds, theta_grid) -> np.ndarray:
    """:func:`chernoff_tail_bound` for several thresholds, evaluating ``K`` once per grid point."""
    grid = np.asarray(theta_grid, dtype=np.float64)
    K = np.array([cumulant(float(t)) for t in grid])
    t = np.asarray(thresholds, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        expo = K[None, :] - grid[None, :] * t[:, None]
    expo = np.where(np.isnan(expo), np.inf, expo)
    return np.exp(np.min(expo, axis=1))


def deviation_rate_estimate(dist: DiscreteDistribution, mode: str, scaling, a: float) -> float:
    """Empirical deviation rate of an exact finite law.

    ``ldp``: ``-(1/L) log P(S >= a*L)`` with speed ``L = scaling``.
    ``mdp``: ``-(sigma^2/a_n^2) log P(S - mu >= a*a_n)`` with ``scaling`` a
    :class:`ModerateScaling`. Thresholds below the centre use the lower
    tail instead. A zero tail returns ``inf``.
    """
    if mode == "ldp":
        L = float(scaling)
        t = a * L
        speed = L
        centre = dist.mean()
    elif mode == "mdp":
        if not isinstance(scaling, ModerateScaling):
            raise DomainError("mdp mode needs a ModerateScaling")
        t = scaling.mu_n + a * scaling.a_n
        speed = scaling.speed
        centre = scaling.mu_n
    else:
        raise DomainError(f"mode must be 'ldp' or 'mdp', got {mode!r}")
    prob = dist.tail_ge(t) if t >= centre else dist.tail_le(t)
    if prob <= 0.0:
        return math.inf
    return -math.log(prob) / speed


def chernoff_rate(cumulant, dist_centre: float, mode: str, scaling, a: float, theta_grid) -> float:
    """The rate implied by the Chernoff bound for the same threshold as :func:`deviation_rate_estimate`."""
    if mode == "ldp":
        t, speed = a * float(scaling), float(scaling)
    else:
        t, speed = scaling.mu_n + a * scaling.a_n, scaling.speed
    if t < dist_centre:
        raise DomainError("chernoff_rate covers upper tails only")
    bound = chernoff_tail_bound(cumulant, t, theta_grid)
    return -math.log(bound) / speed if bound > 0 else math.inf


@dataclass(frozen=True, eq=False)
class SampleBatch:
    model: str
    param: int
    seed: int
    values: np.ndarray = field(repr=False)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox4x64 counter-based generator keyed by ``(seed, stream)``."""
    if seed < 0 or stream < 0:
        raise DomainError("seed and stream must be nonnegative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def sample_z(n: int, spec: AdditiveFunctionSpec, count: int, seed: int,
             table: PrimeTable | None = None, stream: int = 0) -> SampleBatch:
    """``count`` draws of ``g(V)`` with ``V`` uniform on ``{1, ..., n}``."""
    n = int(n)
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    rng = make_rng(seed, stream)
    v = rng.integers(1, n, size=count, endpoint=True)
    if n <= Z_GENERAL_BUDGET:
        if table is None or table.limit < n:
            table = build_prime_table(n, with_spf=False)
        primes, vals = prime_values(spec, table, n)
        gv = additive_sieve(primes, vals, n)
        return SampleBatch("z", n, seed, gv[v])
    if table is None:
        table = build_prime_table(math.isqrt(n) + 1)
    if table.limit**2 < n:
        raise CapacityError(f"n={n} needs a prime table up to sqrt(n); limit is {table.limit}")
    if spec.needs_index and table.limit < n:
        raise CapacityError(f"prime indices up to n={n} need a table up to n")
    out = np.empty(count)
    for i, m in enumerate(v.tolist()):
        out[i] = sum(spec.at_prime(p, 0 if p > table.limit else table.index_of(p)) for p, _ in factorize(m, table))
    return SampleBatch("z", n, seed, out)


def sample_y(Q: int, spec: AdditiveFunctionSpec, count: int, seed: int,
             table: PrimeTable | None = None, stream: int = 1) -> SampleBatch:
    """``count`` draws of ``sum_{p <= Q} g(p) Y_p``.

    For each prime the number of hits among the ``count`` draws is
    Binomial(count, 1/p) and, given that number, the set of hit draws is a
    uniform subset. Small primes draw the subset directly; large primes
    draw positions with replacement together and redraw any prime whose
    positions collide.
    """
    Q = int(Q)
    if Q < 2:
        raise DomainError(f"Q must be >= 2, got {Q}")
    if table is None or table.limit < Q:
        table = build_prime_table(Q, with_spf=False)
    primes, vals = prime_values(spec, table, Q)
    rng = make_rng(seed, stream)
    hits = rng.binomial(count, 1.0 / primes.astype(np.float64))
    small = hits > math.isqrt(count)
    pos_parts, w_parts = [], []
    for i in np.flatnonzero(small):
        pos_parts.append(rng.choice(count, size=int(hits[i]), replace=False))
        w_parts.append(np.full(int(hits[i]), vals[i]))
    big = np.flatnonzero(~small & (hits > 0))
    owner = np.repeat(big, hits[big])
    pos = rng.integers(0, count, size=len(owner))
    key = owner.astype(np.int64) * count + pos
    uniq, first, mult = np.unique(key, return_index=True, return_counts=True)
    bad = np.unique(owner[first[mult > 1]])
    if len(bad):
        clean = ~np.isin(owner, bad)
        owner, pos = owner[clean], pos[clean]
        for i in bad.tolist():
            pos_parts.append(rng.choice(count, size=int(hits[i]), replace=False))
            w_parts.append(np.full(int(hits[i]), vals[i]))
    pos_parts.append(pos)
    w_parts.append(vals[owner])
    allpos = np.concatenate(pos_parts).astype(np.int64)
    allw = np.concatenate(w_parts)
    values = np.bincount(allpos, weights=allw, minlength=count)
    return SampleBatch("y", Q, seed, values)


def clt_statistic(batch: SampleBatch | np.ndarray, n: float) -> np.ndarray:
    """``(X - log log n) / sqrt(log log n)`` for each sample."""
    if n <= math.e:
        raise DomainError(f"log log n must be positive, got n={n}")
    ll = math.log(math.log(n))
    values = batch.values if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=np.float64)
    return (values - ll) / math.sqrt(ll)


@dataclass(frozen=True)
class TruncationSchedule:
    n: int
    ldp_k_n: float
    mdp_k_n: float | None
    C: float


def truncation_schedule(n: int, C: float = math.inf, scaling: ModerateScaling | None = None) -> TruncationSchedule:
    """Prime cutoffs ``n**(1/(log log n)**2)`` and ``n**(a_n/sigma_n**2)``."""
    if n <= math.e:
        raise DomainError(f"log log n must be positive, got n={n}")
    logn = math.log(n)
    ldp = math.exp(logn / math.log(logn) ** 2)
    mdp = math.exp(logn * scaling.a_n / scaling.sigma2_n) if scaling is not None else None
    return TruncationSchedule(int(n), ldp, mdp, float(C))


@dataclass(frozen=True)
class PrimeTailReport:
    n: int
    k_n: float
    prime_sum: float
    loglog_difference: float

    @property
    def difference(self) -> float:
        return self.prime_sum - self.loglog_difference


def large_prime_tail(table: PrimeTable, n: int, k_n: float) -> PrimeTailReport:
    """``sum_{k_n <= p <= n} 1/p`` beside ``log log n - log log k_n``; the gap is reported, not bounded."""
    primes = table.primes_upto(n)
    tail = primes[primes >= k_n].astype(np.float64)
    approx = math.log(math.log(n)) - math.log(math.log(k_n)) if k_n > 1 else math.inf
    return PrimeTailReport(int(n), float(k_n), math.fsum(1.0 / tail), approx)
