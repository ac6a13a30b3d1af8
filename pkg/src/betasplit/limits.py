"""Centering/scaling recipes and the Gaussian limit of the joint statistics.

Two normalizations coexist and both are exposed:

* ``standardize`` applies the per-statistic CLT recipes, whose L and D
  denominators carry the factor a2 = m2/m1^3, so the D coordinate tends to a
  standard normal and the L coordinate to the integrated Brownian motion
  with variance 1/3.

* ``joint_standardize`` divides by the plain powers sqrt(log n) and
  (log n)^{3/2}; in that normalization the joint limit is the Gaussian
  vector whose covariance :func:`limit_covariance` returns, with
  Var(D) = a2, Var(L) = a2/3 and the decrement coordinates
  X_r = sqrt(a2) W(1)/r + Z_r / sqrt(m1 r).

The exact limit sampler uses the decomposition of the integrated Brownian
motion int_0^1 W = W(1)/2 + N(0, 1/12) (independent), so acceptance checks
carry no path-discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .special import ZETA2, ZETA3, centering_integral, phi

M1 = ZETA2
M2 = 2.0 * ZETA3
A2 = M2 / M1**3

_STATS = ("L", "D", "L_r", "K", "K_r", "absorption")


def critical_constants() -> tuple[float, float, float]:
    """(m1, m2, a2) = (zeta(2), 2 zeta(3), m2/m1^3) of the critical case."""
    return M1, M2, A2


def centering(stat: str, n: float, r: int | None = None) -> float:
    """Centering constant of one statistic at size n."""
    _check(stat, n, r)
    logn = math.log(n)
    if stat == "L":
        return logn**2 / (2.0 * M1)
    if stat in ("D", "absorption"):
        return logn / M1
    if stat in ("L_r", "K_r"):
        return logn / (M1 * r)
    # K: integral form (smaller finite-n bias than (log n)^2 / (2 m1))
    return centering_integral(n) / M1


def k_centering_log(n: float) -> float:
    """Alternative K centering (log n)^2/(2 m1); differs from the integral
    form by o((log n)^{3/2})."""
    return math.log(n) ** 2 / (2.0 * M1)


def scaling(stat: str, n: float, r: int | None = None) -> float:
    """Scaling denominator of one statistic at size n."""
    _check(stat, n, r)
    logn = math.log(n)
    if stat == "L":
        return math.sqrt(A2 * logn**3)
    if stat in ("D", "absorption"):
        return math.sqrt(A2 * logn)
    if stat in ("L_r", "K_r"):
        return math.sqrt(logn)
    # K, general-measure form: sqrt(m2 m1^-3 log n) * Phi(n)
    return math.sqrt(A2 * logn) * phi(n)


def unit_scaling(stat: str, n: float) -> float:
    """Unit-variance scaling of the marginal CLTs.

    For D it coincides with :func:`scaling`; for L it is smaller by the
    factor sqrt(3), absorbing the variance 1/3 of the integrated Brownian
    limit.
    """
    if stat == "L":
        return math.sqrt(A2 * math.log(n) ** 3 / 3.0)
    if stat in ("D", "absorption"):
        return scaling(stat, n)
    raise ValueError("unit_scaling is defined for 'L', 'D', 'absorption'")


def standardize(stat: str, n: float, raw, r: int | None = None):
    """(raw - centering) / scaling for one statistic; affine and increasing."""
    c = centering(stat, n, r)
    s = scaling(stat, n, r)
    return (np.asarray(raw, dtype=float) - c) / s


def joint_standardize(n: float, counts, total, hold) -> np.ndarray:
    """Plain-power standardization of ((L_{n,r})_{r<=j}, L_n, D_n).

    Covariances of the result converge to :func:`limit_covariance`.  Accepts
    arrays of shape (reps, j), (reps,), (reps,); returns (reps, j+2).
    """
    counts = np.atleast_2d(np.asarray(counts, dtype=float))
    total = np.asarray(total, dtype=float)
    hold = np.asarray(hold, dtype=float)
    logn = math.log(n)
    j = counts.shape[1]
    rr = np.arange(1, j + 1)
    x = (counts - logn / (M1 * rr)) / math.sqrt(logn)
    lt = (total - logn**2 / (2.0 * M1)) / logn**1.5
    dt = (hold - logn / M1) / math.sqrt(logn)
    return np.column_stack([x, lt, dt])


def limit_covariance(j: int) -> np.ndarray:
    """Covariance of the (j+2)-dimensional limit in plain-power normalization.

    Order (X_1..X_j, L, D):
      Cov(X_r, X_s) = a2/(r s) + 1{r=s}/(m1 r)
      Cov(X_r, L)   = a2/(2 r),  Cov(X_r, D) = a2/r
      Var(L) = a2/3, Cov(L, D) = a2/2, Var(D) = a2
    using Cov(W(1), int_0^1 W) = 1/2 and Var(int_0^1 W) = 1/3.
    """
    if j < 0:
        raise ValueError("j >= 0 required")
    d = j + 2
    cov = np.empty((d, d))
    for a in range(j):
        for b in range(j):
            cov[a, b] = A2 / ((a + 1) * (b + 1))
            if a == b:
                cov[a, b] += 1.0 / (M1 * (a + 1))
    for a in range(j):
        cov[a, j] = cov[j, a] = A2 / (2.0 * (a + 1))
        cov[a, j + 1] = cov[j + 1, a] = A2 / (a + 1)
    cov[j, j] = A2 / 3.0
    cov[j, j + 1] = cov[j + 1, j] = A2 / 2.0
    cov[j + 1, j + 1] = A2
    return cov


def sample_limit_vector(j: int, rng: np.random.Generator,
                        size: int | None = None) -> np.ndarray:
    """Exact draws of the limit vector (X_1..X_j, L, D).

    Z plays W(1); an extra independent normal realizes the exact joint law
    of (int_0^1 W, W(1)) through int_0^1 W = W(1)/2 + N(0, 1/12).
    """
    if j < 0:
        raise ValueError("j >= 0 required")
    m = 1 if size is None else size
    a = math.sqrt(A2)
    z = rng.standard_normal(m)
    z_perp = rng.standard_normal(m)
    zr = rng.standard_normal((m, j))
    rr = np.arange(1, j + 1)
    x = a * z[:, None] / rr + zr / np.sqrt(M1 * rr)
    lt = a * (z / 2.0 + z_perp * math.sqrt(1.0 / 12.0))
    dt = a * z
    out = np.column_stack([x, lt, dt])
    return out[0] if size is None else out


def general_k_covariance(beta: float) -> np.ndarray:
    """Covariance of the general-index limit pair, by quadrature.

    First coordinate beta * int_0^1 W(1-u) u^(beta-1) du, second W(1):
    Var11 = beta^2 * int int min(1-u, 1-v) (uv)^(beta-1) du dv,
    Cov12 = 1/(beta+1), Var22 = 1.  At beta = 1 this is [[1/3, 1/2], [1/2, 1]].
    """
    if beta <= 0:
        raise ValueError("beta > 0 required")
    v11, _ = integrate.dblquad(
        lambda v, u: min(1.0 - u, 1.0 - v) * (u * v) ** (beta - 1.0),
        0.0, 1.0, 0.0, 1.0, epsabs=1e-10,
    )
    v11 *= beta**2
    c12 = 1.0 / (beta + 1.0)
    return np.array([[v11, c12], [c12, 1.0]])


@dataclass
class LimitModel:
    """Bundle of the limit ingredients for j tracked decrement orders."""

    j: int
    m1: float
    m2: float
    a2: float
    covariance: np.ndarray

    def correlation(self) -> np.ndarray:
        sd = np.sqrt(np.diag(self.covariance))
        return self.covariance / np.outer(sd, sd)


def limit_model(j: int) -> LimitModel:
    return LimitModel(j, M1, M2, A2, limit_covariance(j))


def _check(stat: str, n: float, r: int | None) -> None:
    if stat not in _STATS:
        raise ValueError(f"unknown statistic {stat!r}; expected one of {_STATS}")
    if n < 2:
        raise ValueError("n >= 2 required")
    if stat in ("L_r", "K_r"):
        if r is None or r < 1:
            raise ValueError("decrement statistics need r >= 1")
    elif r is not None:
        raise ValueError(f"statistic {stat!r} takes no r")
