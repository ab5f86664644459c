"""
Rate functions by Legendre transform and in closed form
========================================================

"""

# %%
import math

import numpy as np

from primedev import Atoms, Gaussian, Poisson, closed_form_rate, legendre_rate, lambert_w

# %%
# point mass at 1: I(x) = x log x - x + 1, infinite below zero
delta = Atoms([1.0], [1.0])
for x in (-0.5, 0.0, 0.5, 1.0, 2.0):
    r = legendre_rate(delta, x)
    print(f"x={x:5.2f}  I={r.value:.12f}  theta*={r.theta_star}  {r.status}")

# %%
# the numeric transform against the closed forms
xs = np.linspace(0.25, 4.0, 16)
gap = max(abs(legendre_rate(Poisson(1.0), x).value - closed_form_rate("poisson", x, 1.0).value) for x in xs)
print("poisson(1) max gap", gap)
xs = np.linspace(-3, 3, 13)
gap = max(abs(legendre_rate(Gaussian(), x).value - closed_form_rate("gaussian", x).value) for x in xs)
print("gaussian max gap", gap)

# %%
# truncating the measure to |y| <= C changes the rate far from the mean
for C in (math.inf, 3.0, 1.5):
    print("C =", C, [round(legendre_rate(Gaussian(), x, C).value, 6) for x in (0.5, 1.0, 1.4)])

# %%
# Lambert W shows up in the closed forms
print(lambert_w(1.0), lambert_w(math.e), lambert_w(-1 / math.e + 1e-9))
