"""
Reciprocal prime sums and the omega function
=============================================

"""

# %%
# sieve once, reuse the table everywhere
import math

import numpy as np

from primedev import build_prime_table, mertens_sums, omega_sieve

table = build_prime_table(10**7)
print(len(table.primes), "primes up to 1e7")

# %%
# sum of 1/p grows like log log n plus a constant near 0.2615
for n in (10**2, 10**4, 10**6, 10**7):
    s = mertens_sums(table, n)
    print(f"n={n:>9}  sum 1/p = {s.total:.6f}  minus loglog = {s.total - math.log(math.log(n)):.6f}")

# %%
# odd-indexed and even-indexed primes split the sum roughly in half
s = mertens_sums(table, 10**7)
print("odd", s.odd_index, "even", s.even_index)

# %%
# average number of distinct prime factors below n equals sum floor(n/p)/n
n = 10**6
w = omega_sieve(n, table)
print("mean omega", w[1:].mean(), "identity", sum(n // int(p) for p in table.primes_upto(n)) / n)
print("histogram", np.bincount(w[1:]))
