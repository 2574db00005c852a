from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pitmank.combinatorics import PartitionCounts, enumerate_partitions
from pitmank.distribution import (
    MomentReport,
    exact_moment,
    length_pmf,
    length_pmf_oracle,
    moments_json_payload,
    oracle_moment,
    psf_pmf,
)
from pitmank.numerics import DomainError, PitmanParams

HALF = Fraction(1, 2)

rational_alpha = st.fractions(min_value=Fraction(1, 8), max_value=Fraction(7, 8))


def rational_theta(alpha):
    return st.fractions(min_value=-alpha + Fraction(1, 8), max_value=Fraction(10))


class TestComponentPmf:
    def test_fixtures(self):
        params = PitmanParams(3, HALF, HALF)
        assert psf_pmf(PartitionCounts((0, 0, 1), 3), params) == Fraction(1, 5)
        assert psf_pmf(PartitionCounts((3, 0, 0), 3), params) == Fraction(2, 5)

    @given(rational_alpha.flatmap(lambda a: st.tuples(st.just(a), rational_theta(a))))
    @settings(max_examples=30)
    def test_single_point_mass(self, at):
        alpha, theta = at
        params = PitmanParams(1, alpha, theta)
        assert psf_pmf(PartitionCounts((1,), 1), params) == 1

    def test_mismatched_n_rejected(self):
        with pytest.raises(DomainError):
            psf_pmf(PartitionCounts((1, 1, 0), 3), PitmanParams(4, HALF, HALF))

    @pytest.mark.parametrize("n", range(1, 13))
    def test_normalization(self, n):
        params = PitmanParams(n, Fraction(1, 3), Fraction(2, 5))
        total = sum(psf_pmf(c, params) for c in enumerate_partitions(n))
        assert total == 1

    def test_float_mode(self):
        params = PitmanParams(3, 0.5, 0.5)
        assert psf_pmf(PartitionCounts((0, 0, 1), 3), params) == pytest.approx(0.2)


class TestLengthPmf:
    def test_fixture(self):
        params = PitmanParams(3, HALF, HALF)
        assert length_pmf(params) == [Fraction(1, 5), Fraction(2, 5), Fraction(2, 5)]

    def test_degenerate(self):
        assert length_pmf(PitmanParams(1, HALF, Fraction(1))) == [1]

    @given(rational_alpha.flatmap(lambda a: st.tuples(st.just(a), rational_theta(a))))
    @settings(max_examples=30)
    def test_two_point_closed_form(self, at):
        alpha, theta = at
        pmf = length_pmf(PitmanParams(2, alpha, theta))
        assert pmf[0] == (1 - alpha) / (theta + 1)
        assert pmf[1] == (theta + alpha) / (theta + 1)

    @pytest.mark.parametrize(
        "alpha", [Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4)]
    )
    @pytest.mark.parametrize("n", [1, 5, 12])
    def test_normalization_exact(self, alpha, n):
        pmf = length_pmf(PitmanParams(n, alpha, Fraction(3, 4)))
        assert sum(pmf, Fraction(0)) == 1

    def test_float_matches_exact(self):
        exact = length_pmf(PitmanParams(20, HALF, HALF))
        approx = length_pmf(PitmanParams(20, 0.5, 0.5))
        assert isinstance(approx, np.ndarray)
        np.testing.assert_allclose(approx, [float(p) for p in exact], rtol=1e-11)

    def test_float_negative_theta(self):
        exact = length_pmf(PitmanParams(8, Fraction(3, 4), Fraction(-5, 8)))
        approx = length_pmf(PitmanParams(8, 0.75, -0.625))
        np.testing.assert_allclose(approx, [float(p) for p in exact], rtol=1e-10)

    def test_exact_mode_cap(self):
        with pytest.raises(DomainError, match="floating"):
            length_pmf(PitmanParams(300, HALF, HALF), mode="exact")

    def test_exact_mode_requires_rationals(self):
        with pytest.raises(DomainError):
            length_pmf(PitmanParams(5, 0.5, 0.5), mode="exact")


class TestMoments:
    def test_fixture(self):
        params = PitmanParams(3, HALF, HALF)
        assert exact_moment(params, 1) == Fraction(11, 5)
        assert exact_moment(params, 2) == Fraction(27, 5)

    def test_degenerate(self):
        for r in (1, 2, 5):
            assert exact_moment(PitmanParams(1, HALF, Fraction(2)), r) == 1

    def test_oracle_two_point(self):
        assert oracle_moment(PitmanParams(2, HALF, HALF), 1) == Fraction(5, 3)

    @pytest.mark.parametrize("alpha,theta", [
        (Fraction(1, 2), Fraction(1, 2)),
        (Fraction(1, 4), Fraction(10)),
        (Fraction(3, 4), Fraction(-5, 8)),
    ])
    def test_formula_matches_enumeration(self, alpha, theta):
        for n in range(1, 9):
            params = PitmanParams(n, alpha, theta)
            for r in (1, 2, 3):
                assert exact_moment(params, r) == oracle_moment(params, r)

    def test_pmf_matches_enumeration_marginal(self):
        for n in range(1, 9):
            params = PitmanParams(n, Fraction(1, 3), Fraction(2, 3))
            assert length_pmf(params) == length_pmf_oracle(params)

    @given(st.integers(2, 10), st.integers(1, 4))
    @settings(max_examples=25, deadline=None)
    def test_monotone_in_order(self, n, r):
        # K >= 1, so E[K^{r+1}] >= E[K^r]
        params = PitmanParams(n, Fraction(2, 5), Fraction(1, 5))
        assert exact_moment(params, r + 1) >= exact_moment(params, r)

    def test_float_agrees_with_rational(self):
        for n in (100, 1000):
            exact = exact_moment(PitmanParams(n, HALF, HALF), 6, mode="exact")
            approx = exact_moment(PitmanParams(n, 0.5, 0.5), 6, bits=128, mode="float")
            rel = abs(float(approx.value) / float(exact) - 1)
            assert rel < 1e-20

    def test_low_precision_escalates_to_correct_value(self):
        exact = exact_moment(PitmanParams(500, HALF, HALF), 4, mode="exact")
        approx = exact_moment(PitmanParams(500, 0.5, 0.5), 4, bits=53, mode="float")
        assert abs(float(approx.value) / float(exact) - 1) < 1e-12

    def test_rejects_bad_order(self):
        with pytest.raises(DomainError):
            exact_moment(PitmanParams(3, HALF, HALF), 0)
        with pytest.raises(DomainError):
            oracle_moment(PitmanParams(3, HALF, HALF), 0)


class TestMomentReport:
    def test_residuals_validated(self):
        MomentReport(
            r=1, exact=2.0, scaling="n_alpha", normalized=1.5,
            approximations={"leading": 1.7}, residuals={"leading": 0.2},
        )
        with pytest.raises(DomainError):
            MomentReport(
                r=1, exact=2.0, scaling="n_alpha", normalized=1.5,
                approximations={"leading": 1.7}, residuals={"leading": 0.3},
            )

    def test_order_validated(self):
        with pytest.raises(DomainError):
            MomentReport(r=0, exact=1.0, scaling="n_alpha", normalized=1.0)


class TestJsonPayload:
    def test_rationals_rendered_as_strings(self):
        payload = moments_json_payload(
            PitmanParams(3, HALF, HALF), r_values=(1, 2), include_pmf=True
        )
        assert payload["alpha"] == "1/2"
        assert payload["pmf"] == ["1/5", "2/5", "2/5"]
        assert payload["moments"] == {"1": "11/5", "2": "27/5"}

    def test_float_mode_renders_numbers(self):
        payload = moments_json_payload(
            PitmanParams(3, 0.5, 0.5), r_values=(1,), include_pmf=False
        )
        assert payload["moments"]["1"] == pytest.approx(2.2)
