"""Verification suites behind ``primedev verify``.

Each suite returns a list of :class:`Check` records. A check with verdict
``report`` carries a measured value with no pass/fail meaning.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .additive import Constant, TwoValueByIndex, counterexample_schedule, mu_sigma
from .primes import build_prime_table, mertens_sums
from .ratefn import ClosedForm, legendre_rate
from .simulate import (chernoff_rate, chernoff_tail_bounds, deviation_rate_estimate, exact_y_distribution,
                       exact_z_distribution, exact_z_moment, joint_moment_gap, moment_gap_bound_check,
                       y_log_mgf)

PASS, FAIL, REPORT = "pass", "fail", "report"

DUALITY_FAMILIES = [
    ClosedForm("constant", 1.0),
    ClosedForm("constant", 2.5),
    ClosedForm("two_atom_ratio2", 1.0),
    ClosedForm("poisson", 1.0),
    ClosedForm("poisson", 3.0),
    ClosedForm("binomial1", 0.3),
    ClosedForm("gaussian"),
    ClosedForm("binomial2", 0.3),
]


@dataclass(frozen=True)
class Check:
    name: str
    measured: float | str
    bound: float | str
    verdict: str


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


def duality_grid(cf: ClosedForm, points: int = 200) -> np.ndarray:
    if cf.family == "gaussian":
        return np.linspace(-4.0, 4.0, points)
    m = cf.mean
    return np.linspace(m / 4, 4 * m, points)


def duality_gap(cf: ClosedForm, points: int = 200) -> float:
    rho = cf.measure()
    return max(abs(cf.rate(x).value - legendre_rate(rho, x).value) for x in duality_grid(cf, points))


def duality_suite() -> list[Check]:
    out = []
    for cf in DUALITY_FAMILIES:
        gap = duality_gap(cf)
        label = f"duality {cf.family}({'' if cf.param is None else cf.param})"
        if cf.asserted:
            out.append(Check(label, gap, 1e-8, _verdict(gap <= 1e-8)))
        else:
            out.append(Check(label + " published-vs-numeric", gap, "-", REPORT))
    return out


def oracle_suite() -> list[Check]:
    out = []
    d = exact_z_distribution(10, Constant(1))
    out.append(Check("z law N=10", str(d.as_dict()), "{0:0.1, 1:0.7, 2:0.2}",
                     _verdict(d.as_dict() == {0.0: 0.1, 1.0: 0.7, 2.0: 0.2})))
    table = build_prime_table(10**4)
    for n in (10**3, 10**4):
        dz = exact_z_distribution(n, Constant(1), table)
        lhs = exact_z_moment(dz, 1)
        rhs = sum(n // int(p) for p in table.primes_upto(n))
        out.append(Check(f"mean identity n={n}", str(lhs), f"{rhs}/{n}", _verdict(lhs * n == rhs)))

    # independent-model law against enumeration of all 2^4 outcomes over {2,3,5,7}
    spec = TwoValueByIndex(1.0, 2.0)
    dy = exact_y_distribution(10, spec, table=table).as_dict()
    primes, vals = [2, 3, 5, 7], [1.0, 2.0, 1.0, 2.0]
    brute: dict[float, float] = {}
    for bits in itertools.product((0, 1), repeat=4):
        w = math.prod(1 / p if b else 1 - 1 / p for p, b in zip(primes, bits))
        s = sum(v for v, b in zip(vals, bits) if b)
        brute[s] = brute.get(s, 0.0) + w
    err = max(abs(dy.get(k, 0.0) - v) for k, v in brute.items())
    out.append(Check("y law Q=10 vs enumeration", err, 1e-15, _verdict(err <= 1e-15)))

    rng = np.random.default_rng(20131208)
    worst, ok = 0.0, True
    plist = table.primes_upto(200)
    for _ in range(100):
        k = int(rng.integers(1, 5))
        subset = rng.choice(plist, size=k, replace=False)
        n = int(rng.integers(1, 10**6))
        jm = joint_moment_gap(n, subset)
        ok &= 0 <= jm.gap <= Fraction(1, n)
        worst = max(worst, float(jm.gap * n))
    out.append(Check("joint moment gap in [0, 1/n] (100 subsets)", worst, "n*gap<=1", _verdict(ok)))

    for Q in (10**3, 10**4):
        dist = exact_y_distribution(Q, Constant(1), table=table)
        K = y_log_mgf(Q, Constant(1), table=table)
        thresholds = np.linspace(dist.mean(), 40.0, 50)
        bounds = chernoff_tail_bounds(K, thresholds, np.linspace(0.01, 8.0, 400))
        exact = np.array([dist.tail_ge(t) for t in thresholds])
        out.append(Check(f"exact tail <= chernoff Q={Q}", float(np.max(exact / bounds)), 1.0,
                         _verdict(bool(np.all(exact <= bounds)))))
    return out


def moments_suite(n: int = 10**5, Q: int = 50, C: float = 1.0, r_max: int = 5) -> list[Check]:
    rows = moment_gap_bound_check(n, Q, C, r_max, Constant(1))
    return [Check(f"moment gap r={row.r} (n={n}, Q={Q}, C={C})", float(row.gap), float(row.bound),
                  _verdict(row.passed)) for row in rows]


def mdp_suite(Q: int = 10**6) -> list[Check]:
    table = build_prime_table(Q, with_spf=False)
    spec = Constant(1)
    dist = exact_y_distribution(Q, spec, table=table)
    scaling = mu_sigma(spec, table, Q)
    K = y_log_mgf(Q, spec, table=table)
    grid = np.linspace(0.005, 10.0, 2000)
    out = []
    rates = []
    for x in (0.5, 1.0):
        r = deviation_rate_estimate(dist, "mdp", scaling, x)
        cr = chernoff_rate(K, scaling.mu_n, "mdp", scaling, x, grid)
        rates.append(r)
        out.append(Check(f"mdp rate x={x} finite and positive", r, "(0, inf)", _verdict(0 < r < math.inf)))
        out.append(Check(f"mdp rate x={x} >= chernoff rate", r, cr, _verdict(r >= cr)))
        out.append(Check(f"mdp rate x={x} vs x^2/2", r, 0.5 * x * x, REPORT))
    out.append(Check("mdp rate increasing in x", rates[1] - rates[0], 0.0, _verdict(rates[1] > rates[0])))
    return out


def ldp_suite(Qs=(10**4, 10**6, 10**8), a: float = 2.0) -> list[Check]:
    table = build_prime_table(max(Qs), with_spf=False)
    spec = Constant(1)
    target = a * math.log(a) - a + 1
    grid = np.linspace(0.005, 6.0, 600)
    out, rates = [], {}
    for Q in Qs:
        dist = exact_y_distribution(Q, spec, table=table)
        L = math.log(math.log(Q))
        r = deviation_rate_estimate(dist, "ldp", L, a)
        cr = chernoff_rate(y_log_mgf(Q, spec, table=table), dist.mean(), "ldp", L, a, grid)
        rates[Q] = r
        out.append(Check(f"ldp rate Q={Q} >= chernoff rate", r, cr, _verdict(r >= cr)))
        M = mertens_sums(table, Q).total
        out.append(Check(f"ldp rate Q={Q} with speed sum 1/p", deviation_rate_estimate(dist, "ldp", M, a),
                         target, REPORT))
    lo, hi = min(Qs), max(Qs)
    out.append(Check(f"|rate(Q={hi}) - I({a})| < |rate(Q={lo}) - I({a})|", abs(rates[hi] - target),
                     abs(rates[lo] - target), _verdict(abs(rates[hi] - target) < abs(rates[lo] - target))))
    out.append(Check("sum 1/p vs log log Q at largest Q", mertens_sums(table, hi).total,
                     math.log(math.log(hi)), REPORT))
    return out


def counterexample_suite(K: int = 6) -> list[Check]:
    sched = counterexample_schedule(1.0, 2.0, 0.1, 1.0, K=K)
    out = []
    for k, (u, c, ok) in enumerate(zip(sched.breakpoints, sched.cumulants, sched.satisfied()), start=1):
        if k % 2:
            out.append(Check(f"u_{k}={u:.6g} cumulant <= low+delta", float(c), sched.low_level + sched.delta,
                             _verdict(bool(ok))))
        else:
            out.append(Check(f"u_{k}={u:.6g} cumulant >= high-delta", float(c), sched.high_level - sched.delta,
                             _verdict(bool(ok))))
    return out


SUITES = {
    "duality": duality_suite,
    "oracle": oracle_suite,
    "moments": moments_suite,
    "mdp": mdp_suite,
    "ldp": ldp_suite,
    "counterexample": counterexample_suite,
}


def run_suite(name: str) -> list[Check]:
    if name == "all":
        return [c for fn in SUITES.values() for c in fn()]
    return SUITES[name]()
