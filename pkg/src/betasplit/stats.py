"""Sample containers, summary statistics and goodness-of-fit verdicts."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Mapping, Sequence

import numpy as np
from scipy import stats as _st

#: Default p-value floor for pass/fail decisions.
P_FLOOR = 1e-3


@dataclass
class SampleMatrix:
    """Replicate-by-statistic results of one simulation run."""

    n: int
    reps: int
    labels: list[str]
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.reps < 2:
            raise ValueError("SampleMatrix needs reps >= 2")
        if self.values.shape != (self.reps, len(self.labels)):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"(reps={self.reps}, cols={len(self.labels)})"
            )
        if not np.isfinite(self.values).all():
            raise ValueError("SampleMatrix entries must be finite")

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.labels.index(label)]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "reps": self.reps,
            "labels": list(self.labels),
            "values": self.values.tolist(),
            "provenance": self.provenance,
        }

    def write_json(self, fh: IO[str]) -> None:
        json.dump(self.to_json_dict(), fh)
        fh.write("\n")

    def write_csv(self, fh: IO[str]) -> None:
        fh.write("replicate,n," + ",".join(f"stat:{c}" for c in self.labels) + "\n")
        for i in range(self.reps):
            row = ",".join(format(v, ".17g") for v in self.values[i])
            fh.write(f"{i},{self.n},{row}\n")


@dataclass
class TestReport:
    """One statistical verdict: pass iff p >= p_floor or |obs - ref| <= tol."""

    name: str
    observed: float
    reference: float | None = None
    p_value: float | None = None
    tolerance: float | None = None
    p_floor: float | None = None
    passed: bool = False
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "observed": self.observed,
            "reference": self.reference,
            "p_value": self.p_value,
            "tolerance": self.tolerance,
            "p_floor": self.p_floor,
            "pass": self.passed,
            "metadata": self.metadata,
        }

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        bits = [f"{verdict} {self.name}: observed={self.observed:.6g}"]
        if self.reference is not None:
            bits.append(f"reference={self.reference:.6g}")
        if self.p_value is not None:
            bits.append(f"p={self.p_value:.4g} (floor {self.p_floor:g})")
        if self.tolerance is not None:
            bits.append(f"tolerance={self.tolerance:.4g}")
        return " ".join(bits)


def reports_to_json(reports: Sequence[TestReport], fh: IO[str]) -> None:
    json.dump([r.to_dict() for r in reports], fh, indent=2)
    fh.write("\n")


@dataclass
class Summary:
    labels: list[str]
    mean: np.ndarray
    variance: np.ndarray
    skewness: np.ndarray
    se_mean: np.ndarray
    covariance: np.ndarray
    correlation: np.ndarray
    degenerate: np.ndarray  # zero-variance columns, flagged not fatal


def summarize(values: np.ndarray, labels: Sequence[str] | None = None) -> Summary:
    """Column means/variances/skewness with standard errors, plus cov/corr.

    Standard unbiased estimators; the mean's standard error is s/sqrt(reps).
    SEs are only meaningful for reps >= 30 or so.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    reps, cols = values.shape
    if reps < 2:
        raise ValueError("summarize needs at least 2 replicates")
    if labels is None:
        labels = [f"col{i}" for i in range(cols)]
    mean = values.mean(axis=0)
    var = values.var(axis=0, ddof=1)
    degenerate = var == 0.0
    centered = values - mean
    m2 = centered.var(axis=0)
    m3 = (centered**3).mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        skew = np.where(degenerate, 0.0, m3 / np.where(degenerate, 1.0, m2**1.5))
    se_mean = np.sqrt(var / reps)
    cov = np.cov(values, rowvar=False).reshape(cols, cols)
    sd = np.sqrt(np.diag(cov))
    denom = np.outer(sd, sd)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(denom > 0, cov / np.where(denom > 0, denom, 1.0), 0.0)
    np.fill_diagonal(corr, 1.0)
    return Summary(list(labels), mean, var, skew, se_mean, cov, corr, degenerate)


def ks_normal(x: np.ndarray, mu: float, sigma: float, name: str = "ks_normal",
              p_floor: float = P_FLOOR) -> TestReport:
    """One-sample Kolmogorov-Smirnov test against Normal(mu, sigma^2)."""
    if sigma <= 0:
        raise ValueError("ks_normal needs sigma > 0")
    x = np.asarray(x, dtype=float)
    res = _st.kstest(x, "norm", args=(mu, sigma), method="asymp")
    passed = res.pvalue >= p_floor
    return TestReport(name, float(res.statistic), p_value=float(res.pvalue),
                      p_floor=p_floor, passed=bool(passed),
                      metadata={"mu": mu, "sigma": sigma, "reps": len(x)})


def ks_distance_normal(x: np.ndarray, mu: float = 0.0, sigma: float = 1.0) -> float:
    """Plain KS distance to Normal(mu, sigma^2), no p-value."""
    x = np.sort(np.asarray(x, dtype=float))
    n = len(x)
    cdf = _st.norm.cdf(x, loc=mu, scale=sigma)
    hi = np.abs(cdf - np.arange(1, n + 1) / n).max()
    lo = np.abs(cdf - np.arange(n) / n).max()
    return float(max(hi, lo))


def ks_two_sample(a: np.ndarray, b: np.ndarray, name: str = "ks_two_sample",
                  p_floor: float = P_FLOOR) -> TestReport:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("ks_two_sample needs nonempty samples")
    res = _st.ks_2samp(a, b, method="asymp")
    passed = res.pvalue >= p_floor
    return TestReport(name, float(res.statistic), p_value=float(res.pvalue),
                      p_floor=p_floor, passed=bool(passed),
                      metadata={"n_a": len(a), "n_b": len(b)})


def chi2_discrete(observed: np.ndarray, pmf: np.ndarray, name: str = "chi2",
                  p_floor: float = P_FLOOR, min_expected: float = 5.0) -> TestReport:
    """Pearson chi-square of observed counts against an exact pmf.

    Adjacent support cells are pooled left to right until each pooled cell
    has expected count >= min_expected; leftover mass joins the last cell, so
    total count and probability are preserved exactly.
    """
    observed = np.asarray(observed, dtype=float)
    pmf = np.asarray(pmf, dtype=float)
    if observed.shape != pmf.shape or observed.size == 0:
        raise ValueError("observed counts and pmf must be same nonempty shape")
    total = observed.sum()
    expected = pmf * total
    obs_cells: list[float] = []
    exp_cells: list[float] = []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_cells.append(acc_o)
            exp_cells.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if exp_cells:
            obs_cells[-1] += acc_o
            exp_cells[-1] += acc_e
        else:
            obs_cells.append(acc_o)
            exp_cells.append(acc_e)
    if len(exp_cells) < 2:
        raise ValueError("chi2_discrete needs at least 2 cells after pooling")
    obs_arr = np.array(obs_cells)
    exp_arr = np.array(exp_cells)
    stat = float(((obs_arr - exp_arr) ** 2 / exp_arr).sum())
    dof = len(exp_cells) - 1
    p = float(_st.chi2.sf(stat, dof))
    return TestReport(name, stat, p_value=p, p_floor=p_floor,
                      passed=bool(p >= p_floor),
                      metadata={"dof": dof, "cells": len(exp_cells),
                                "total": float(total)})


def compare_covariance(empirical: np.ndarray, reference: np.ndarray, reps: int,
                       rel_tol: float = 0.0, name: str = "covariance") -> TestReport:
    """Entrywise covariance comparison within 3 asymptotic standard errors.

    SE(C_ij) uses the normal-theory formula sqrt((C_ii*C_jj + C_ij^2)/reps).
    With rel_tol > 0 an entry also passes when within rel_tol relative of the
    reference (whichever allowance is looser). The verdict is invariant under
    simultaneous permutation of both matrices.
    """
    emp = np.asarray(empirical, dtype=float)
    ref = np.asarray(reference, dtype=float)
    if emp.shape != ref.shape or emp.ndim != 2 or emp.shape[0] != emp.shape[1]:
        raise ValueError("matrices must be square and same shape")
    d = emp.shape[0]
    worst = 0.0
    worst_entry = (0, 0)
    failures = []
    for i in range(d):
        for j in range(i, d):
            se = math.sqrt((emp[i, i] * emp[j, j] + emp[i, j] ** 2) / reps)
            allow = max(3.0 * se, rel_tol * abs(ref[i, j]))
            gap = abs(emp[i, j] - ref[i, j])
            score = gap / allow if allow > 0 else math.inf
            if score > worst:
                worst = score
                worst_entry = (i, j)
            if gap > allow:
                failures.append([i, j, float(emp[i, j]), float(ref[i, j]), float(allow)])
    return TestReport(name, worst, reference=1.0, tolerance=1.0,
                      passed=not failures,
                      metadata={"worst_entry": list(worst_entry),
                                "failures": failures, "reps": reps,
                                "rel_tol": rel_tol})
