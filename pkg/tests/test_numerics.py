import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpf

from pitmank.numerics import (
    ApproxScalar,
    DomainError,
    PitmanParams,
    gamma_decay_expansion,
    gamma_growth_expansion,
    gamma_ratio_product,
    gamma_ratio_product_expansion,
    log_gamma,
    rising_factorial,
    rising_factorial_expansion,
    stable_eval,
    stirling_gamma,
)


class TestRisingFactorial:
    def test_empty_product(self):
        assert rising_factorial(7, 0, 3) == 1
        assert rising_factorial(Fraction(-1, 3), 0, Fraction(1, 2)) == 1

    def test_integer_case(self):
        assert rising_factorial(2, 3, 1) == 24

    def test_fractional_step(self):
        assert rising_factorial(Fraction(1, 2), 2, Fraction(1, 2)) == Fraction(1, 2)

    def test_ordinary_matches_gamma(self):
        val = rising_factorial(2.5, 4)
        ref = math.gamma(6.5) / math.gamma(2.5)
        assert val == pytest.approx(ref, rel=1e-12)

    def test_domain_rejections(self):
        with pytest.raises(DomainError):
            rising_factorial(1, -1)
        with pytest.raises(DomainError):
            rising_factorial(1, 2, -1)
        with pytest.raises(DomainError):
            rising_factorial(Fraction(-1, 2), 1, Fraction(1, 2))

    @given(st.integers(1, 8), st.fractions(min_value=0, max_value=4), st.fractions(min_value=0, max_value=2))
    def test_recurrence(self, i, x, y):
        # (x)_{i+1;y} = (x)_{i;y} * (x + i y)
        left = rising_factorial(x + 1, i + 1, y)
        right = rising_factorial(x + 1, i, y) * (x + 1 + i * y)
        assert left == right


class TestLogGamma:
    def test_reference_values_certified(self):
        # 20 closed-form anchors: ln((m-1)!) at integers and
        # ln((2m)! sqrt(pi) / (4^m m!)) at half-integers; both reduce to
        # logs of exact rationals plus ln(pi)/2, so they are independent of
        # the log-gamma algorithm itself.
        bits = 128
        with mpmath.workprec(bits + 64):
            for m in range(1, 11):
                ref = mpmath.log(mpf(math.factorial(m - 1))) if m > 1 else mpf(0)
                got = log_gamma(m, bits=bits).value
                assert abs(got - ref) <= abs(ref) * mpf(1e-20) + mpf(2) ** (-100)
            for m in range(10):
                rational = Fraction(math.factorial(2 * m), 4**m * math.factorial(m))
                ref = (
                    mpmath.log(mpf(rational.numerator))
                    - mpmath.log(mpf(rational.denominator))
                    + mpmath.log(mpmath.pi) / 2
                )
                got = log_gamma(Fraction(2 * m + 1, 2), bits=bits).value
                assert abs(got - ref) <= abs(ref) * mpf(1e-20)

    def test_simple_values(self):
        assert float(log_gamma(1)) == 0
        assert float(log_gamma(0.5)) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-15)
        assert float(log_gamma(5)) == pytest.approx(math.log(24), rel=1e-15)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            log_gamma(0)
        with pytest.raises(DomainError):
            log_gamma(-3.2)

    def test_precision_recorded(self):
        out = log_gamma(7, bits=192)
        assert isinstance(out, ApproxScalar)
        assert out.precision_bits == 192


class TestStirlingGamma:
    def test_value_at_one(self):
        # sqrt(2 pi) / e * 13/12
        expected = math.sqrt(2 * math.pi) * math.exp(-1) * 13 / 12
        assert float(stirling_gamma(1)) == pytest.approx(expected, rel=1e-12)
        assert float(stirling_gamma(1)) == pytest.approx(0.99898, abs=1e-5)

    def test_relative_error_at_ten(self):
        # the dropped 1/(288 x^2) series term puts the error near 3.2e-5
        rel = abs(float(stirling_gamma(10)) - 362880.0) / 362880.0
        assert rel < 1 / (288 * 10**2)

    def test_relative_error_at_hundred(self):
        exact = mpmath.exp(log_gamma(100).value)
        rel = abs(float(stirling_gamma(100)) - float(exact)) / float(exact)
        assert rel <= 1e-6

    def test_error_envelope(self):
        # empirically below 0.01 / x^2 for x >= 5; compare in mpf space
        # since Gamma overflows float64 past x ~ 170
        for x in (5, 8, 13, 21, 50, 121, 200):
            with mpmath.workprec(192):
                exact = mpmath.exp(log_gamma(x, bits=160).value)
                rel = float(abs(stirling_gamma(x, bits=160).value - exact) / exact)
            assert rel <= 0.01 / x**2


class TestGammaRatioProduct:
    def test_exact_fixtures(self):
        params = PitmanParams(3, Fraction(1, 2), Fraction(1, 2))
        assert gamma_ratio_product(params, 1) == Fraction(16, 5)
        assert gamma_ratio_product(params, 2) == 14
        # the two sample-size ratios alone, with the leading rising
        # factorial divided out
        two_part = gamma_ratio_product(params, 1) / rising_factorial(Fraction(2), 1)
        assert two_part == Fraction(8, 5)

    def test_empty_sample_reduces_to_rising_factorial(self):
        params = PitmanParams(1, Fraction(1, 3), Fraction(2, 3))
        for i in range(4):
            expected = rising_factorial(Fraction(3), i)  # theta/alpha + 1 = 3
            assert gamma_ratio_product(params, i) == expected

    def test_zero_index_is_one(self):
        params = PitmanParams(5, Fraction(1, 2), Fraction(1, 2))
        assert gamma_ratio_product(params, 0) == 1

    @pytest.mark.parametrize("n", [3, 50, 1000, 10_000])
    def test_float_agrees_with_exact(self, n):
        params = PitmanParams(n, Fraction(1, 2), Fraction(3, 4))
        for i in (1, 3, 6):
            exact = gamma_ratio_product(params, i)
            approx = gamma_ratio_product(PitmanParams(n, 0.5, 0.75), i, bits=128)
            rel = abs(float(approx) - float(exact)) / float(exact)
            assert rel < 1e-25


class TestExpansions:
    def test_growth_theta_zero(self):
        # correction term vanishes at theta = 0
        out = gamma_growth_expansion(1000, 0, 0.5, 2)
        assert float(out) == pytest.approx(1000.0, rel=1e-30)

    def test_growth_accuracy(self):
        n, theta, alpha, i = 10**6, 10.0, 0.5, 1
        exact = mpmath.exp(
            mpmath.loggamma(mpf(theta) + n + i * alpha) - mpmath.loggamma(mpf(theta) + n)
        )
        approx = gamma_growth_expansion(n, theta, alpha, i).value
        rel = abs(float(approx / exact - 1))
        assert rel < 20 * (1 / n + theta**2 / n**2)

    def test_decay_zero_index(self):
        assert float(gamma_decay_expansion(100.0, 0.5, 0)) == 1.0

    def test_decay_accuracy(self):
        theta, alpha, i = 1000.0, 0.5, 1
        exact = mpmath.exp(
            mpmath.loggamma(mpf(theta) + 1) - mpmath.loggamma(mpf(theta) + 1 + i * alpha)
        )
        rel = abs(float(gamma_decay_expansion(theta, alpha, i).value / exact - 1))
        assert rel < 10 / theta**2

    def test_decay_integer_shift_closed_form(self):
        # i alpha = 1: exact ratio is 1/(theta+1); difference is O(1/theta^3)
        theta = 100.0
        approx = float(gamma_decay_expansion(theta, Fraction(1, 3), 3))
        exact = 1 / (theta + 1)
        assert abs(approx - exact) < 5 / theta**3

    def test_rising_exact_at_first_order(self):
        theta, alpha = 7.0, 0.25
        approx = rising_factorial_expansion(theta, alpha, 1).value
        exact = theta / alpha + 1
        assert abs(float(approx) - exact) < 1e-30

    def test_rising_accuracy(self):
        theta, alpha, i = 1000.0, 0.5, 2
        exact = float(rising_factorial(theta / alpha + 1, i))
        rel = abs(float(rising_factorial_expansion(theta, alpha, i)) - exact) / exact
        assert rel < 10 / theta**2

    def test_product_expansion_accuracy(self):
        params = PitmanParams(10**6, 0.5, 1000.0)
        exact = gamma_ratio_product(params, 1, bits=160)
        approx = gamma_ratio_product_expansion(params, 1, bits=160)
        rel = abs(float(approx.value / exact.value - 1))
        theta, n = 1000.0, 10**6
        assert rel < 20 * (1 / theta**2 + theta**2 / n**2)

    def test_rejects_nonpositive_theta(self):
        with pytest.raises(DomainError):
            gamma_decay_expansion(0, 0.5, 1)
        with pytest.raises(DomainError):
            rising_factorial_expansion(-1.0, 0.5, 1)
        with pytest.raises(DomainError):
            gamma_ratio_product_expansion(PitmanParams(10, 0.5, -0.25), 1)


class TestStableEval:
    def test_resolves_deep_cancellation(self):
        # invisible at the first working precision (96 bits), resolved by
        # the doubling retries
        def f():
            return (mpf(1) + mpf(2) ** (-100)) - mpf(1)

        out = stable_eval(f, 64)
        assert out == mpf(2) ** (-100)

    def test_plain_value(self):
        assert stable_eval(lambda: mpf(3.5), 64) == 3.5


class TestPitmanParams:
    def test_validation(self):
        with pytest.raises(DomainError):
            PitmanParams(0, 0.5, 0.5)
        with pytest.raises(DomainError):
            PitmanParams(3, 0.0, 0.5)
        with pytest.raises(DomainError):
            PitmanParams(3, 1.0, 0.5)
        with pytest.raises(DomainError):
            PitmanParams(3, 0.5, -0.5)

    def test_exactness_detection(self):
        assert PitmanParams(3, Fraction(1, 2), 1).is_exact
        assert not PitmanParams(3, 0.5, 1.0).is_exact
        with pytest.raises(DomainError):
            PitmanParams(3, 0.5, 1.0).exact_alpha_theta()

    def test_negative_theta_allowed_above_minus_alpha(self):
        p = PitmanParams(4, Fraction(3, 4), Fraction(-5, 8))
        assert p.theta == Fraction(-5, 8)

    def test_approx_scalar_floor(self):
        with pytest.raises(DomainError):
            ApproxScalar(mpf(1), 32)


@settings(max_examples=50)
@given(
    st.integers(1, 30),
    st.fractions(min_value=Fraction(1, 10), max_value=Fraction(9, 10)),
    st.integers(0, 5),
)
def test_gamma_ratio_product_positive(n, alpha, i):
    # every factor in the rising-factorial reduction is positive
    params = PitmanParams(n, alpha, Fraction(1, 2))
    assert gamma_ratio_product(params, i) > 0
