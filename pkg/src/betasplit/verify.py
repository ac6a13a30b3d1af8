"""Statistical verification suites behind ``betasplit verify``.

Four suites bundle the acceptance checks:

* ``coupling``  - exact rational identity between the tree and occupancy
  laws, plus the non-circular Monte Carlo check of the size recurrence
  (full tree builds against the exact law and the chain).
* ``phi``       - special-function accuracy: the growth function against
  adaptive quadrature, its derivatives against high-precision finite
  differences, moments against the log-integral.
* ``clt``       - the central limit behaviour of the height statistics at
  n = 10^6 and the self-consistency of the exact limit sampler.
* ``occupancy`` - the truncated-path oracle against the chain, conservation
  identities, truncation consistency, and the Gumbel maximum.

Every suite takes one master seed and derives fixed sub-seeds from it, so a
(seed, suite) pair is fully deterministic.  Several ``clt`` tolerances are
asymptotic statements that the exact law has not yet reached at n = 10^6;
those reports fail honestly and say so in their metadata.
"""

from __future__ import annotations

import math
import time

import numpy as np
from scipy import integrate
from scipy import stats as _st

from . import chains, limits, subordinator, trees
from .special import moment, phi, phi_deriv
from .stats import (
    P_FLOOR,
    TestReport,
    chi2_discrete,
    compare_covariance,
    ks_distance_normal,
    ks_two_sample,
)

DEFAULT_SEEDS = {
    "coupling": 20260801,
    "phi": 20260802,
    "clt": 20260803,
    "occupancy": 20260804,
}


# ---------------------------------------------------------------------------
# coupling suite (criteria 1 and 2)

def verify_coupling(seed: int) -> list[TestReport]:
    reports = []
    t0 = time.monotonic()
    mismatches = 0
    checked = 0
    for n in range(2, 11):
        occ = chains.exact_occupancy_law(n, 3)
        tree = chains.exact_law(n + 1, 3)
        checked += 1
        if occ.support != tree.support:
            mismatches += 1
        if occ.hold_mean != tree.hold_mean:
            mismatches += 1
        if occ.hold_second_moment != tree.hold_second_moment:
            mismatches += 1
        if occ.probability_sum() != 1 or tree.probability_sum() != 1:
            mismatches += 1
    reports.append(TestReport(
        "1.exact_coupling", float(mismatches), reference=0.0, tolerance=0.0,
        passed=mismatches == 0,
        metadata={"n_range": [2, 10], "j": 3, "laws_checked": checked,
                  "elapsed_s": round(time.monotonic() - t0, 3)}))

    t0 = time.monotonic()
    reps = 100_000
    tree_mat = trees.sample_leaf_matrix(-1.0, 8, "continuous", 3, reps, seed)
    chain_mat = chains.sample_leaf_matrix(8, 3, reps, seed + 1)
    law = chains.exact_law(8, 3)
    marg = law.total_marginal()
    support = sorted(marg)
    observed = np.array([(tree_mat.column("L") == v).sum() for v in support], float)
    pmf = np.array([float(marg[v]) for v in support])
    chi2 = chi2_discrete(observed, pmf, name="2.tree_L8_chi2")
    chi2.metadata["elapsed_s"] = round(time.monotonic() - t0, 3)
    reports.append(chi2)
    ks = ks_two_sample(tree_mat.column("D"), chain_mat.column("D"),
                       name="2.tree_vs_chain_D8_ks")
    ks.metadata["reps"] = reps
    reports.append(ks)
    return reports


# ---------------------------------------------------------------------------
# phi suite (criterion 3)

def _phi_quadrature(t: float) -> float:
    val, _ = integrate.quad(
        lambda y: -math.expm1(-y) / y if y > 0 else 1.0, 0.0, t,
        epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def _phi_deriv_fd_reference(r: int, t: float, cache: dict) -> float:
    """Order-r central difference of quadrature-evaluated Phi.

    Computed in 30-digit arithmetic (the growth function's r-th derivative
    can sit ten orders below the function value, which double-precision
    differencing cannot resolve); step h = t/1000 with one Richardson step.
    """
    import mpmath as mp

    def phival(x):
        key = mp.nstr(x, 25)
        if key not in cache:
            cache[key] = mp.quad(lambda y: (1 - mp.e**(-y)) / y, [0, x])
        return cache[key]

    def stencil(h):
        if r == 1:
            return (phival(t + h) - phival(t - h)) / (2 * h)
        if r == 2:
            return (phival(t + h) - 2 * phival(t) + phival(t - h)) / h**2
        if r == 3:
            return (phival(t + 2 * h) - 2 * phival(t + h)
                    + 2 * phival(t - h) - phival(t - 2 * h)) / (2 * h**3)
        return (phival(t + 2 * h) - 4 * phival(t + h) + 6 * phival(t)
                - 4 * phival(t - h) + phival(t - 2 * h)) / h**4

    with mp.workdps(30):
        h = mp.mpf(t) / 1000
        d1 = stencil(h)
        d2 = stencil(h / 2)
        return float((4 * d2 - d1) / 3)


def verify_phi(seed: int | None = None) -> list[TestReport]:
    """Deterministic special-function checks; the seed is accepted but unused."""
    reports = []
    t0 = time.monotonic()
    worst = 0.0
    for t in (0.5, 1.0, 5.0, 20.0):
        ref = _phi_quadrature(t)
        worst = max(worst, abs(phi(t) - ref) / abs(ref))
    reports.append(TestReport(
        "3.phi_vs_quadrature", worst, reference=0.0, tolerance=1e-10,
        passed=worst < 1e-10,
        metadata={"grid": [0.5, 1.0, 5.0, 20.0]}))

    worst = 0.0
    worst_at = None
    cache: dict = {}
    for t in (0.5, 1.0, 2.0, 5.0, 20.0):
        for r in (1, 2, 3, 4):
            ref = _phi_deriv_fd_reference(r, t, cache)
            rel = abs(phi_deriv(r, t) - ref) / abs(ref)
            if rel > worst:
                worst, worst_at = rel, (r, t)
    reports.append(TestReport(
        "3.phi_deriv_vs_finite_differences", worst, reference=0.0,
        tolerance=1e-5, passed=worst < 1e-5,
        metadata={"worst_at": worst_at, "orders": [1, 2, 3, 4]}))

    worst = 0.0
    for r in (1, 2, 3):
        ref, _ = integrate.quad(lambda x: (-math.log1p(-x)) ** r / x, 0.0, 1.0,
                                epsabs=1e-13, epsrel=1e-13, limit=200)
        worst = max(worst, abs(moment(r) - ref) / ref)
    reports.append(TestReport(
        "3.moment_vs_log_integral", worst, reference=0.0, tolerance=1e-8,
        passed=worst < 1e-8,
        metadata={"orders": [1, 2, 3],
                  "elapsed_s": round(time.monotonic() - t0, 3)}))
    return reports


# ---------------------------------------------------------------------------
# clt suite (criteria 4, 5 and 7)

def verify_clt(seed: int) -> list[TestReport]:
    reports = []
    n = 10**6
    reps = 200_000
    j = 3
    t0 = time.monotonic()
    mat = chains.sample_leaf_matrix(n, j, reps, seed)
    elapsed_sim = round(time.monotonic() - t0, 3)
    logn = math.log(n)
    m1, _, a2 = limits.critical_constants()

    d_std = limits.standardize("D", n, mat.column("D"))
    var = float(d_std.var(ddof=1))
    reports.append(TestReport(
        "4.variance_D_std", var, reference=1.0, tolerance=0.10,
        passed=abs(var - 1.0) <= 0.10,
        metadata={"n": n, "reps": reps, "elapsed_sim_s": elapsed_sim,
                  "note": "finite-size variance excess decays like 1/log n"}))
    skew = float(_st.skew(d_std))
    reports.append(TestReport(
        "4.skewness_D_std", skew, reference=0.0, tolerance=0.10,
        passed=abs(skew) < 0.10,
        metadata={"note": "true skewness of the exact law at n=10^6 is "
                          "~0.41 and decays like (log n)^(-1/2); this "
                          "asymptotic tolerance is not reachable here"}))
    ks_dist = ks_distance_normal(d_std - d_std.mean())
    reports.append(TestReport(
        "4.ks_D_recentered", ks_dist, reference=0.0, tolerance=0.02,
        passed=ks_dist < 0.02,
        metadata={"note": "KS to the standard normal after subtracting the "
                          "empirical mean; dominated by the residual "
                          "variance and skewness at n=10^6"}))
    mean = float(d_std.mean())
    reports.append(TestReport(
        "4.mean_D_std", mean, reference=0.0, tolerance=0.35,
        passed=abs(mean) <= 0.35,
        metadata={"note": "centering omits an O(1) constant; bias of order "
                          "(log n)^(-1/2)"}))

    corr = float(np.corrcoef(mat.column("L"), mat.column("D"))[0, 1])
    reports.append(TestReport(
        "5.corr_L_D", corr, reference=math.sqrt(3) / 2, tolerance=0.05,
        passed=abs(corr - math.sqrt(3) / 2) <= 0.05,
        metadata={"note": "finite-size correlation deficit decays like "
                          "(log n)^(-1/2)"}))
    std = limits.joint_standardize(n, mat.values[:, :j], mat.column("L"),
                                   mat.column("D"))
    emp = np.cov(std, rowvar=False)
    cov_rep = compare_covariance(emp, limits.limit_covariance(j), reps,
                                 rel_tol=0.15, name="5.joint_covariance")
    reports.append(cov_rep)
    ratios = [float(mat.column(f"L_{r}").mean() * m1 * r / logn)
              for r in range(1, j + 1)]
    worst_ratio = max(ratios, key=lambda x: abs(x - 1.0))
    reports.append(TestReport(
        "5.mean_ratio_L_r", worst_ratio, reference=1.0, tolerance=0.10,
        passed=all(abs(x - 1.0) <= 0.10 for x in ratios),
        metadata={"ratios": ratios}))

    t0 = time.monotonic()
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(10,)))
    draws = limits.sample_limit_vector(j, rng, size=1_000_000)
    emp_lim = np.cov(draws, rowvar=False)
    rep7 = compare_covariance(emp_lim, limits.limit_covariance(j),
                              draws.shape[0], name="7.limit_sampler_covariance")
    rep7.metadata["elapsed_s"] = round(time.monotonic() - t0, 3)
    reports.append(rep7)
    return reports


# ---------------------------------------------------------------------------
# occupancy suite (criterion 6)

def verify_occupancy(seed: int) -> list[TestReport]:
    reports = []
    n = 100
    reps = 20_000
    eps = 1e-4
    t0 = time.monotonic()
    # j = n keeps the complete multiplicity histogram: no overflow bucket,
    # so the conservation identity is checkable column-wise.
    oracle = subordinator.sample_occupancy_matrix(n, eps, n, reps, seed)
    chain = chains.sample_occupancy_matrix(n, 3, reps, seed + 1)
    elapsed = round(time.monotonic() - t0, 3)

    ks = ks_two_sample(oracle.column("K"), chain.column("K"),
                       name="6.K_oracle_vs_chain_ks")
    ks.metadata.update({"eps": eps, "reps": reps, "elapsed_s": elapsed,
                        "resamples": oracle.provenance["resamples"]})
    reports.append(ks)

    weights = np.arange(1, n + 1, dtype=float)
    totals = oracle.values[:, :n] @ weights
    frac_ok = float((totals == n).mean())
    reports.append(TestReport(
        "6.mark_conservation", frac_ok, reference=1.0, tolerance=0.0,
        passed=frac_ok == 1.0,
        metadata={"identity": "sum_r r*K_{n,r} = n on every accepted sample"}))

    finer = subordinator.sample_occupancy_matrix(n, eps / 10, 3, reps, seed + 2)
    ks_eps = ks_two_sample(oracle.column("K"), finer.column("K"),
                           name="6.eps_consistency_ks")
    ks_eps.metadata.update({"eps_coarse": eps, "eps_fine": eps / 10,
                            "resamples_fine": finer.provenance["resamples"]})
    reports.append(ks_eps)

    t0 = time.monotonic()
    n_max = 10_000
    reps_max = 10_000
    rng = np.random.default_rng(np.random.SeedSequence(seed + 3))
    maxima = np.empty(reps_max)
    chunk = 2048
    for start in range(0, reps_max, chunk):
        stop = min(start + chunk, reps_max)
        maxima[start:stop] = rng.standard_exponential((stop - start, n_max)).max(axis=1)
    shifted = maxima - math.log(n_max)
    res = _st.kstest(shifted, lambda z: np.exp(-np.exp(-z)), method="asymp")
    reports.append(TestReport(
        "6.gumbel_max_ks", float(res.statistic), p_value=float(res.pvalue),
        p_floor=P_FLOOR, passed=res.pvalue >= P_FLOOR,
        metadata={"n": n_max, "reps": reps_max,
                  "elapsed_s": round(time.monotonic() - t0, 3)}))
    return reports


SUITES = {
    "coupling": verify_coupling,
    "phi": verify_phi,
    "clt": verify_clt,
    "occupancy": verify_occupancy,
}


def run_suite(name: str, seed: int) -> list[TestReport]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}")
    return SUITES[name](seed)
