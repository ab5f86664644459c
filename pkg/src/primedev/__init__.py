"""Large and moderate deviations for strongly additive functions over the primes.

The package compares two models of Σ g(p) over primes p: the deterministic
count over a uniformly random integer in [1, n] and the independent-Bernoulli
surrogate with P(p is hit) = 1/p. It computes rate functions (numerically
and in closed form), exact laws of both models, and the moment gap between them.
"""

from .additive import (AdditiveFunctionSpec, Constant, CounterexampleSchedule, EmpiricalMeasure,
                       IntervalOscillating, ModerateScaling, Table, TwoValueByIndex,
                       counterexample_schedule, empirical_rho, g_eval, mu_sigma, spec_from_json)
from .errors import CapacityError, DomainError, InfeasibleError, NumericError, UnsupportedSpecError
from .measures import (Atoms, Binomial, CumulantValue, Gaussian, LimitMeasure, Poisson, cumulant,
                       measure_from_json, measure_moment)
from .primes import PrimeTable, build_prime_table, factorize, mertens_sums, omega_sieve
from .ratefn import (ClosedForm, RateFunctionResult, closed_form_for, closed_form_rate, lambert_w,
                     legendre_rate, mdp_rate)
from .simulate import (DiscreteDistribution, SampleBatch, chernoff_tail_bound, clt_statistic,
                       deviation_rate_estimate, exact_y_distribution, exact_z_distribution,
                       exact_z_moment, joint_moment_gap, large_prime_tail, moment_gap_bound_check,
                       sample_y, sample_z, truncation_schedule)

__version__ = "0.1.0"
