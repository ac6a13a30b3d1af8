"""Deterministic numerics shared by every simulator and verifier.

Harmonic numbers (exact rationals for small indices, compensated floats
beyond), the exponential integral E1, the growth function

    Phi(t) = integral_0^t (1 - exp(-y)) / y dy,

its derivatives through the gamma-CDF closed form, the scaled derivative
functions ``h_r``, and the centering integral of the occupancy count.

Phi is evaluated through the exact identity ``Phi(t) = log t + gamma + E1(t)``
(series below t = 1), so no quadrature appears in hot paths; the identity is
validated against adaptive quadrature by the verification suite.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

import numpy as np
from scipy import integrate
from scipy.special import zeta as _zeta

EULER_GAMMA = float(np.euler_gamma)
ZETA2 = math.pi ** 2 / 6.0
ZETA3 = float(_zeta(3.0))

#: Largest index with an exact rational harmonic number.
EXACT_CUTOFF = 64

#: Hard cap on the dense float harmonic table (8 bytes per entry).
MAX_TABLE = 10_000_000


class HarmonicTable:
    """Partial sums h_m = sum_{j<=m} 1/j, grown on demand.

    Exact ``Fraction`` values up to :data:`EXACT_CUTOFF`; beyond that a dense
    float64 array accumulated in extended precision so the entries carry no
    cancellation drift even at m = 10^7.
    """

    def __init__(self, cutoff: int = EXACT_CUTOFF):
        self.cutoff = cutoff
        acc = Fraction(0)
        self._exact = [Fraction(0)]
        for j in range(1, cutoff + 1):
            acc += Fraction(1, j)
            self._exact.append(acc)
        self._values = np.zeros(2, dtype=np.float64)
        self._values[1] = 1.0
        self._acc = np.longdouble(1.0)
        self._lock = threading.Lock()

    def _grow(self, m: int) -> None:
        with self._lock:
            top = self._values.size - 1
            if m <= top:
                return
            if m > MAX_TABLE:
                raise ValueError(
                    f"harmonic table capped at {MAX_TABLE} entries, got m={m}"
                )
            new_top = min(MAX_TABLE, max(m, 2 * top))
            recip = 1.0 / np.arange(top + 1, new_top + 1, dtype=np.longdouble)
            tail = np.cumsum(recip) + self._acc
            self._acc = tail[-1]
            self._values = np.concatenate(
                [self._values, tail.astype(np.float64)]
            )

    def values(self, m: int) -> np.ndarray:
        """Array ``H`` with ``H[k] = h_k`` for 0 <= k <= m (H[0] = 0)."""
        if m < 0:
            raise ValueError("m must be nonnegative")
        if m >= self._values.size:
            self._grow(m)
        return self._values[: m + 1]

    def value(self, m: int) -> float:
        if m < 1:
            raise ValueError("harmonic numbers need m >= 1")
        if m >= self._values.size:
            self._grow(m)
        return float(self._values[m])

    def exact(self, m: int) -> Fraction:
        if m < 1:
            raise ValueError("harmonic numbers need m >= 1")
        if m > self.cutoff:
            raise ValueError(f"exact harmonic numbers stop at m={self.cutoff}")
        return self._exact[m]


_TABLE = HarmonicTable()


def harmonic(m: int) -> float:
    """h_m = 1 + 1/2 + ... + 1/m as a float; rejects m = 0."""
    return _TABLE.value(m)


def harmonic_exact(m: int) -> Fraction:
    """Exact rational h_m for m <= EXACT_CUTOFF."""
    return _TABLE.exact(m)


def harmonic_array(m: int) -> np.ndarray:
    """Read-only view of [h_0, h_1, ..., h_m] (h_0 = 0)."""
    return _TABLE.values(m)


def exp_integral_e1(t: float) -> float:
    """E1(t) = integral_t^inf exp(-y)/y dy to ~1e-14 relative accuracy.

    Power series for t <= 1, modified Lentz continued fraction for t > 1.
    """
    if t <= 0:
        raise ValueError("exp_integral_e1 needs t > 0")
    if t <= 1.0:
        return -EULER_GAMMA - math.log(t) + _phi_series(t)
    # E1(t) = exp(-t) / (t + 1 - 1/(t + 3 - 4/(t + 5 - 9/(...))))
    tiny = 1e-300
    b = t + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 200):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (b + a * d)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(-t)
    raise RuntimeError(f"continued fraction for E1 did not converge at t={t}")


def _phi_series(t: float) -> float:
    # sum_{k>=1} (-1)^(k+1) t^k / (k * k!), rapid for |t| <= 1
    total = 0.0
    num = 1.0
    for k in range(1, 60):
        num *= t / k
        term = num / k
        total += term if k % 2 == 1 else -term
        if num / (k + 1) < 1e-18 * abs(total):
            break
    return total


def phi(t: float) -> float:
    """Phi(t) = integral_0^t (1 - exp(-y))/y dy.

    Equals ``log t + gamma + E1(t)`` exactly; the series branch below t = 1
    avoids the log/gamma cancellation there.
    """
    if t <= 0:
        raise ValueError("phi needs t > 0")
    if t < 1.0:
        return _phi_series(t)
    return math.log(t) + EULER_GAMMA + exp_integral_e1(t)


def gamma_cdf(r: int, t: float) -> float:
    """CDF of the gamma distribution with shape r and unit rate.

    F_r(t) = 1 - exp(-t) * (1 + t + ... + t^(r-1)/(r-1)!).
    """
    if r < 1 or r != int(r):
        raise ValueError("gamma_cdf needs integer r >= 1")
    if t < 0:
        raise ValueError("gamma_cdf needs t >= 0")
    if t == 0.0:
        return 0.0
    if t > 500.0:
        return 1.0
    term = 1.0
    s = 1.0
    for i in range(1, int(r)):
        term *= t / i
        s += term
    # s <= e^t <= e^500, so both factors stay representable
    return 1.0 - math.exp(-t) * s


def phi_deriv(r: int, t: float) -> float:
    """r-th derivative of Phi via (-1)^(r+1) (r-1)! t^(-r) F_r(t)."""
    if r < 1 or r != int(r):
        raise ValueError("phi_deriv needs integer r >= 1 (use phi for r = 0)")
    if t <= 0:
        raise ValueError("phi_deriv needs t > 0")
    sign = 1.0 if r % 2 == 1 else -1.0
    return sign * math.factorial(r - 1) * t ** (-r) * gamma_cdf(r, t)


def h_r(r: int, t: float) -> float:
    """Scaled derivative h_r(t) = (-1)^(r+1) Phi^(r)(e^t) e^(rt) / r!.

    Simplifies to F_r(e^t)/r: nondecreasing in t with limit 1/r.
    """
    if r < 1 or r != int(r):
        raise ValueError("h_r needs integer r >= 1")
    if t > 690.0:
        return 1.0 / r
    return gamma_cdf(r, math.exp(t)) / r


def centering_integral(n: float) -> float:
    """integral_1^n Phi(y)/y dy by adaptive quadrature on the log scale.

    Grows like (log n)^2/2 + gamma*log n + O(1).
    """
    if n < 1:
        raise ValueError("centering_integral needs n >= 1")
    if n == 1:
        return 0.0
    val, _ = integrate.quad(
        lambda u: phi(math.exp(u)), 0.0, math.log(n), epsabs=1e-11, epsrel=1e-11, limit=200
    )
    return val


def moment(r: float) -> float:
    """r-th moment of the jump measure: Gamma(r+1) * zeta(r+1), r > 0."""
    if r <= 0:
        raise ValueError("moment needs r > 0")
    return math.gamma(r + 1.0) * float(_zeta(r + 1.0))
