"""
Seeded sampling and an oscillating cumulant
===========================================

"""

# %%
import math

from primedev import Constant, clt_statistic, counterexample_schedule, sample_y, sample_z

# %%
# same seed, same draws
a = sample_z(10**6, Constant(1), 10**5, seed=7)
b = sample_z(10**6, Constant(1), 10**5, seed=7)
print("identical:", (a.values == b.values).all())

# %%
# the standardized count is centred slowly and its variance sits well below 1 at this size
z = clt_statistic(a, 10**6)
print("mean", z.mean(), "variance", z.var(), "log log n", math.log(math.log(10**6)))
y = sample_y(10**6, Constant(1), 10**5, seed=7)
print("independent model mean", y.values.mean())

# %%
# g switches between 1 and 2 on longer and longer stretches; the normalized cumulant never settles
s = counterexample_schedule(1.0, 2.0, 0.1, 1.0, K=6)
for u, c in zip(s.breakpoints, s.cumulants):
    print(f"u={u:14.6g}  cumulant {c:.6f}")
print("satisfied", s.satisfied().tolist())
