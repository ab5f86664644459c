"""
Empirical deviation rates and Chernoff bounds
=============================================

"""

# %%
import math

import numpy as np

from primedev import Constant, build_prime_table, exact_y_distribution, mu_sigma
from primedev.simulate import chernoff_rate, deviation_rate_estimate, y_log_mgf

table = build_prime_table(10**7, with_spf=False)
spec = Constant(1)
theta = np.linspace(0.005, 6.0, 600)

# %%
# large deviations at speed log log Q, threshold twice the speed
print("I(2) =", 2 * math.log(2) - 1)
for Q in (10**4, 10**5, 10**6, 10**7):
    d = exact_y_distribution(Q, spec, table=table)
    L = math.log(math.log(Q))
    rate = deviation_rate_estimate(d, "ldp", L, 2.0)
    bound = chernoff_rate(y_log_mgf(Q, spec, table=table), d.mean(), "ldp", L, 2.0, theta)
    print(f"Q={Q:>8}  rate {rate:.4f}  chernoff rate {bound:.4f}")

# %%
# moderate deviations with a_n = sigma^1.5
Q = 10**6
d = exact_y_distribution(Q, spec, table=table)
sc = mu_sigma(spec, table, Q)
for x in (0.25, 0.5, 1.0, -0.5):
    print(f"x={x:5.2f}  rate {deviation_rate_estimate(d, 'mdp', sc, x):.4f}  x^2/2 {x * x / 2:.4f}")
