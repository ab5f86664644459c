"""Prime sieving, factorization and sums of reciprocals of primes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError

MAX_TABLE_LIMIT = 2**31
OMEGA_SIEVE_BUDGET = 10**8


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """Primes up to ``limit`` and, optionally, the smallest-prime-factor array.

    ``spf[m]`` is the smallest prime dividing ``m`` for ``2 <= m <= limit``
    (``spf[0] = spf[1] = 0``). Tables built with ``with_spf=False`` only
    carry the primes, which is all the Bernoulli model needs and costs an
    eighth of the memory at ``limit = 10**8``.
    """

    limit: int
    primes: np.ndarray
    spf: np.ndarray | None = None

    def __post_init__(self):
        self.primes.setflags(write=False)
        if self.spf is not None:
            self.spf.setflags(write=False)

    def __len__(self):
        return len(self.primes)

    def __repr__(self):
        return f"PrimeTable(limit={self.limit}, count={len(self.primes)}, spf={self.spf is not None})"

    def count_upto(self, n: int) -> int:
        """Number of primes ``<= n``."""
        return int(np.searchsorted(self.primes, n, side="right"))

    def primes_upto(self, n: int) -> np.ndarray:
        if n > self.limit:
            raise CapacityError(f"n={n} exceeds table limit {self.limit}")
        return self.primes[: self.count_upto(n)]

    def index_of(self, p: int) -> int:
        """1-based position of the prime ``p`` in the ordered sequence of primes."""
        if p > self.limit:
            raise CapacityError(f"prime {p} is beyond table limit {self.limit}")
        i = int(np.searchsorted(self.primes, p))
        if i >= len(self.primes) or self.primes[i] != p:
            raise DomainError(f"{p} is not prime")
        return i + 1


def build_prime_table(limit: int, with_spf: bool = True) -> PrimeTable:
    """Sieve all primes up to ``limit``.

    With ``with_spf`` the sieve records, for every composite, the first prime
    that strikes it, which is its smallest prime factor.
    """
    limit = int(limit)
    if limit < 2:
        raise DomainError(f"limit must be >= 2, got {limit}")
    if limit > MAX_TABLE_LIMIT:
        raise CapacityError(f"limit {limit} exceeds cap 2**31")
    root = math.isqrt(limit)
    if not with_spf:
        # odd-only bitmap: index i stands for 2*i + 1
        is_prime = np.ones(limit // 2 + 1, dtype=bool)
        is_prime[0] = False
        for i in range(1, root // 2 + 1):
            if is_prime[i]:
                p = 2 * i + 1
                is_prime[p * p // 2 :: p] = False
        odd = 2 * np.flatnonzero(is_prime[: (limit - 1) // 2 + 1]).astype(np.int64) + 1
        primes = np.concatenate(([2], odd[odd <= limit])).astype(np.int64)
        return PrimeTable(limit, primes)

    spf = np.zeros(limit + 1, dtype=np.uint32)
    for p in range(2, root + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    idx = np.flatnonzero(spf == 0)
    primes = idx[idx >= 2].astype(np.int64)
    spf[primes] = primes
    return PrimeTable(limit, primes, spf)


def factorize(m: int, table: PrimeTable) -> list[tuple[int, int]]:
    """Prime factorization of ``m`` as ``[(prime, exponent), ...]``, primes increasing.

    Uses the smallest-prime-factor array when ``m <= table.limit`` and trial
    division by the table's primes up to ``table.limit**2`` otherwise.

    >>> factorize(60, build_prime_table(100))
    [(2, 2), (3, 1), (5, 1)]
    """
    m = int(m)
    if m < 1:
        raise DomainError(f"cannot factorize {m}")
    if m > table.limit * table.limit:
        raise CapacityError(f"{m} exceeds factorization capacity {table.limit}**2")
    out: list[tuple[int, int]] = []
    if m <= table.limit and table.spf is not None:
        spf = table.spf
        while m > 1:
            p = int(spf[m])
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        return out
    for p in table.primes:
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
    if m > 1:
        out.append((m, 1))
    return out


@dataclass(frozen=True)
class MertensSums:
    total: float
    odd_index: float
    even_index: float


def mertens_sums(table: PrimeTable, n: int) -> MertensSums:
    """Sums of ``1/p`` over primes ``p <= n``: all, odd-indexed and even-indexed.

    Odd-indexed means ``p_1 = 2, p_3 = 5, ...``. Each partial sum is
    correctly rounded (``math.fsum``) and ``total`` is their sum.
    """
    primes = table.primes_upto(n)
    recip = 1.0 / primes.astype(np.float64)
    odd = math.fsum(recip[0::2])
    even = math.fsum(recip[1::2])
    return MertensSums(odd + even, odd, even)


def additive_sieve(primes: np.ndarray, values, N: int, dtype=np.float64) -> np.ndarray:
    """``out[m] = sum of values[i] over primes[i] dividing m``, for ``0 <= m <= N``.

    ``values`` is either a scalar (the same weight on every prime) or an
    array aligned with ``primes``. ``out[0]`` is left at zero.
    """
    primes = np.asarray(primes, dtype=np.int64)
    primes = primes[primes <= N]
    scalar = np.ndim(values) == 0
    if not scalar:
        values = np.asarray(values, dtype=dtype)[: len(primes)]
    out = np.zeros(N + 1, dtype=dtype)
    # small primes: one strided slice each; large primes: one gather per multiplier
    cut = int(np.searchsorted(primes, max(2, math.isqrt(N)), side="right"))
    for i in range(cut):
        out[primes[i] :: primes[i]] += values if scalar else values[i]
    big = primes[cut:]
    big_vals = values if scalar else values[cut:]
    if len(big):
        for j in range(1, N // int(big[0]) + 1):
            k = int(np.searchsorted(big, N // j, side="right"))
            if k == 0:
                break
            out[j * big[:k]] += big_vals if scalar else big_vals[:k]
    out[0] = 0
    return out


def omega_sieve(N: int, table: PrimeTable | None = None) -> np.ndarray:
    """Number of distinct prime factors of every integer up to ``N``.

    Returns an ``uint8`` array of length ``N + 1``; entry ``m`` is
    ``omega(m)`` for ``1 <= m <= N`` and entry 0 is an unused zero.
    """
    N = int(N)
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if N > OMEGA_SIEVE_BUDGET:
        raise CapacityError(f"N={N} exceeds omega sieve budget {OMEGA_SIEVE_BUDGET}")
    if N == 1:
        return np.zeros(2, dtype=np.uint8)
    if table is None or table.limit < N:
        table = build_prime_table(N, with_spf=False)
    return additive_sieve(table.primes_upto(N), 1, N, dtype=np.uint8)
