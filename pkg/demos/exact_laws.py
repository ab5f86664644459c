"""
Exact laws of the two models
============================

"""

# %%
# divisibility model: omega of a uniform integer in 1..N
from primedev import (Constant, TwoValueByIndex, build_prime_table, exact_y_distribution, exact_z_distribution,
                      moment_gap_bound_check)

print(exact_z_distribution(10, Constant(1)).as_dict())
print(exact_z_distribution(30, Constant(1)).as_dict())

# %%
# independent model: one Bernoulli(1/p) per prime, convolved exactly
table = build_prime_table(10**6, with_spf=False)
y = exact_y_distribution(10**6, Constant(1), table=table)
print("support", len(y.probs), "mass", y.mass(), "mean", y.mean())

# %%
# g alternates between 1 and 2 along the ordered primes
y2 = exact_y_distribution(10**4, TwoValueByIndex(1, 2), table=table)
print({k: round(v, 6) for k, v in list(y2.as_dict().items())[:8]})

# %%
# moments of the two models agree to within (CQ)^r / n
for row in moment_gap_bound_check(10**5, 50, 1.0, 5, Constant(1)):
    print(row.r, float(row.gap), float(row.bound), row.passed)
