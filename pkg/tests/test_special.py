import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from betasplit.special import (
    EULER_GAMMA,
    ZETA2,
    ZETA3,
    centering_integral,
    exp_integral_e1,
    gamma_cdf,
    h_r,
    harmonic,
    harmonic_array,
    harmonic_exact,
    moment,
    phi,
    phi_deriv,
)


def quad_e1(t):
    val, _ = integrate.quad(lambda y: math.exp(-y) / y, t, np.inf)
    return val


def quad_phi(t):
    val, _ = integrate.quad(lambda y: -math.expm1(-y) / y if y > 0 else 1.0,
                            0.0, t, epsabs=1e-13, epsrel=1e-13)
    return val


class TestHarmonic:
    def test_first_values(self):
        assert harmonic(1) == 1.0
        assert harmonic(2) == 1.5
        assert harmonic(3) == pytest.approx(11 / 6, abs=1e-15)

    def test_exact_values(self):
        assert harmonic_exact(1) == 1
        assert harmonic_exact(3) == Fraction(11, 6)
        acc = Fraction(0)
        for m in range(1, 65):
            acc += Fraction(1, m)
            assert harmonic_exact(m) == acc

    def test_exact_cutoff(self):
        with pytest.raises(ValueError):
            harmonic_exact(65)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            harmonic(0)
        with pytest.raises(ValueError):
            harmonic_exact(0)

    def test_increments(self):
        # h_m - h_{m-1} = 1/m to 1e-14 for all m <= 10^4
        H = harmonic_array(10_000)
        m = np.arange(1, 10_001)
        assert np.max(np.abs(np.diff(H) - 1.0 / m)) < 1e-14

    def test_log_gamma_bound(self):
        # |h_m - (log m + gamma)| <= 1/(2m)
        for m in (1, 2, 5, 17, 100, 9999):
            gap = harmonic(m) - math.log(m) - EULER_GAMMA
            assert 0 < gap <= 1 / (2 * m)

    def test_array_prefix(self):
        H = harmonic_array(50)
        assert H[0] == 0.0
        assert H[1] == 1.0
        assert H[50] == pytest.approx(float(harmonic_exact(50)), abs=1e-15)


class TestExpIntegral:
    def test_against_quadrature_at_1(self):
        assert exp_integral_e1(1.0) == pytest.approx(quad_e1(1.0), rel=1e-11)
        assert exp_integral_e1(1.0) == pytest.approx(0.21938393439552, abs=1e-13)

    def test_against_quadrature_at_10(self):
        assert exp_integral_e1(10.0) == pytest.approx(4.15697e-6, abs=1e-11)
        assert exp_integral_e1(10.0) == pytest.approx(quad_e1(10.0), rel=1e-7)

    def test_branch_seam(self):
        # series (t <= 1) and continued fraction (t > 1) agree across t = 1
        lo = exp_integral_e1(1.0)
        hi = exp_integral_e1(1.0 + 1e-12)
        assert abs(lo - hi) < 1e-12

    def test_upper_bound(self):
        # E1(t) < exp(-t)/t for t >= 1
        for t in (1.0, 2.0, 5.0, 10.0, 30.0):
            assert exp_integral_e1(t) < math.exp(-t) / t

    def test_domain(self):
        with pytest.raises(ValueError):
            exp_integral_e1(0.0)
        with pytest.raises(ValueError):
            exp_integral_e1(-1.0)


class TestPhi:
    def test_value_at_1(self):
        assert phi(1.0) == pytest.approx(0.79659959930686, abs=1e-10)
        assert phi(1.0) == pytest.approx(quad_phi(1.0), rel=1e-12)

    def test_asymptotic(self):
        # Phi(t) - log t - gamma -> 0 exponentially fast
        assert phi(20.0) == pytest.approx(math.log(20.0) + EULER_GAMMA, abs=1e-9)

    def test_small_t(self):
        assert phi(1e-8) == pytest.approx(1e-8, rel=1e-6)
        assert phi(1e-12) < 1e-11

    def test_quadrature_grid(self):
        for t in (0.25, 0.5, 1.0, 2.0, 5.0, 20.0):
            assert phi(t) == pytest.approx(quad_phi(t), rel=1e-11)

    def test_strictly_increasing_and_remainder_decreasing(self):
        grid = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
        vals = [phi(t) for t in grid]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        rem = [phi(t) - math.log(t) - EULER_GAMMA for t in grid if t >= 1]
        assert all(b < a for a, b in zip(rem, rem[1:]))
        assert rem[-1] > 0

    def test_domain(self):
        with pytest.raises(ValueError):
            phi(0.0)


class TestGammaCdf:
    def test_exponential_case(self):
        for t in (0.1, 1.0, 3.0):
            assert gamma_cdf(1, t) == pytest.approx(-math.expm1(-t), rel=1e-14)

    def test_shape_two(self):
        assert gamma_cdf(2, 1.0) == pytest.approx(1 - 2 / math.e, abs=1e-14)
        assert gamma_cdf(2, 1.0) == pytest.approx(0.26424111766, abs=1e-11)

    def test_at_origin(self):
        for r in (1, 2, 5):
            assert gamma_cdf(r, 0.0) == 0.0

    def test_against_scipy(self):
        from scipy.stats import gamma as gamma_dist
        for r in (1, 2, 3, 6):
            for t in (0.2, 1.0, 4.0, 25.0):
                assert gamma_cdf(r, t) == pytest.approx(
                    gamma_dist.cdf(t, r), rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            gamma_cdf(0, 1.0)
        with pytest.raises(ValueError):
            gamma_cdf(2, -0.5)


class TestPhiDeriv:
    def test_first_derivative_closed_form(self):
        for t in (0.3, 1.0, 7.0):
            assert phi_deriv(1, t) == pytest.approx(-math.expm1(-t) / t, rel=1e-14)

    def test_order_two_at_one(self):
        assert phi_deriv(2, 1.0) == pytest.approx(-(1 - 2 / math.e), abs=1e-13)

    def test_large_t_asymptotics(self):
        # (-1)^(r+1) Phi^(r)(t) ~ (r-1)! t^(-r)
        for r in (1, 2, 3, 4):
            t = 60.0
            lead = math.factorial(r - 1) * t ** (-r)
            assert abs(phi_deriv(r, t)) == pytest.approx(lead, rel=1e-10)

    def test_sign_alternation(self):
        # complete monotonicity of Phi': signs alternate at every order
        for r in range(1, 7):
            for t in (0.2, 0.9, 1.5, 6.0, 25.0):
                assert (-1) ** (r + 1) * phi_deriv(r, t) > 0

    def test_scaled_derivative_nondecreasing(self):
        # (-1)^(r+1) t^r Phi^(r)(t) is nondecreasing in t for r <= 4
        grid = np.linspace(0.05, 30.0, 120)
        for r in (1, 2, 3, 4):
            vals = [(-1) ** (r + 1) * t**r * phi_deriv(r, t) for t in grid]
            assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_order_zero_rejected(self):
        with pytest.raises(ValueError):
            phi_deriv(0, 1.0)


class TestHr:
    def test_value(self):
        assert h_r(1, 0.0) == pytest.approx(0.63212056, abs=1e-8)
        assert h_r(1, 0.0) == pytest.approx(gamma_cdf(1, 1.0), rel=1e-14)

    def test_limit(self):
        for r in (1, 2, 3, 5):
            assert h_r(r, 40.0) == pytest.approx(1.0 / r, rel=1e-15)
            assert h_r(r, 1000.0) == 1.0 / r

    def test_monotone_spot(self):
        assert h_r(2, 0.0) == pytest.approx(0.13212, abs=1e-5)
        assert h_r(2, math.log(2.0)) == pytest.approx(0.29699, abs=1e-5)
        assert h_r(2, 0.0) < h_r(2, math.log(2.0))

    def test_nondecreasing(self):
        grid = np.linspace(-5.0, 10.0, 200)
        for r in (1, 2, 3, 4):
            vals = [h_r(r, t) for t in grid]
            assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_integral_growth(self):
        # int_0^s h_r(y) dy = s/r + O(1): bounded gap, stabilizing in s
        for r in (1, 2, 3):
            gaps = []
            for s in (4.0, 7.0, 9.0):
                val, _ = integrate.quad(lambda y: h_r(r, y), 0.0, s, limit=200)
                gaps.append(val - s / r)
            assert all(abs(g) < 1.0 for g in gaps)
            assert abs(gaps[-1] - gaps[-2]) < 1e-3


class TestMoments:
    def test_values(self):
        assert moment(1) == pytest.approx(ZETA2, rel=1e-15)
        assert moment(1) == pytest.approx(1.6449340668, abs=1e-10)
        assert moment(2) == pytest.approx(2 * ZETA3, rel=1e-15)
        assert moment(2) == pytest.approx(2.4041138064, abs=1e-9)

    def test_log_integral_identity(self):
        # moment(r) = int_0^1 x^-1 (-log(1-x))^r dx
        for r in (1, 2, 3):
            ref, _ = integrate.quad(lambda x: (-math.log1p(-x)) ** r / x,
                                    0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
            assert moment(r) == pytest.approx(ref, rel=1e-8)

    def test_domain(self):
        with pytest.raises(ValueError):
            moment(0)


class TestCenteringIntegral:
    def test_empty(self):
        assert centering_integral(1.0) == 0.0

    def test_asymptotic_e10(self):
        n = math.exp(10.0)
        val = centering_integral(n)
        assert abs(val - (50.0 + 10.0 * EULER_GAMMA)) <= 1.0

    def test_asymptotic_1e6(self):
        logn = math.log(1e6)
        val = centering_integral(1e6)
        assert abs(val - (logn**2 / 2 + EULER_GAMMA * logn)) <= 1.0

    def test_against_direct_quadrature(self):
        for n in (3.0, 50.0, 1e4):
            ref, _ = integrate.quad(lambda y: quad_phi(y) / y, 1.0, n, limit=300)
            assert centering_integral(n) == pytest.approx(ref, rel=1e-8)

    def test_domain(self):
        with pytest.raises(ValueError):
            centering_integral(0.5)
