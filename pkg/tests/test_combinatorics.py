from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pitmank.combinatorics import (
    CNumberTable,
    PartitionCounts,
    enumerate_partitions,
    gen_stirling_c,
    stirling2,
    weighted_stirling_R,
)
from pitmank.numerics import DomainError, rising_factorial


def set_partition_count(n_items, n_blocks):
    """Brute-force oracle: count set partitions of {0..n_items-1} into
    exactly n_blocks nonempty blocks."""
    if n_items == 0:
        return 1 if n_blocks == 0 else 0

    def rec(item, blocks):
        if item == n_items:
            return 1 if len(blocks) == n_blocks else 0
        total = 0
        for b in blocks:
            b.append(item)
            total += rec(item + 1, blocks)
            b.pop()
        if len(blocks) < n_blocks:
            blocks.append([item])
            total += rec(item + 1, blocks)
            blocks.pop()
        return total

    return rec(0, [])


def partition_count(n):
    """Euler pentagonal-number recurrence for p(n)."""
    p = [1] + [0] * n
    for m in range(1, n + 1):
        total = 0
        j = 1
        while True:
            g1 = j * (3 * j - 1) // 2
            g2 = j * (3 * j + 1) // 2
            if g1 > m and g2 > m:
                break
            sign = -1 if j % 2 == 0 else 1
            if g1 <= m:
                total += sign * p[m - g1]
            if g2 <= m:
                total += sign * p[m - g2]
            j += 1
        p[m] = total
    return p[n]


class TestStirling2:
    def test_fixtures(self):
        assert stirling2(3, 2) == 3
        assert stirling2(4, 2) == 7
        assert stirling2(0, 0) == 1

    def test_diagonal_and_conventions(self):
        for r in range(8):
            assert stirling2(r, r) == 1
        assert stirling2(2, 5) == 0
        for r in range(1, 6):
            assert stirling2(r, 0) == 0

    def test_against_enumeration(self):
        for r in range(7):
            for i in range(r + 1):
                assert stirling2(r, i) == set_partition_count(r, i)

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            stirling2(-1, 0)


class TestWeightedStirling:
    def test_top_is_one(self):
        for r in range(1, 7):
            assert weighted_stirling_R(r, r, Fraction(7, 3)) == 1

    @given(st.integers(2, 8), st.fractions(min_value=-3, max_value=5))
    def test_subdiagonal_closed_form(self, r, lam):
        assert weighted_stirling_R(r, r - 1, lam) == Fraction(r * (r - 1), 2) + r * lam

    def test_bottom_power(self):
        lam = Fraction(3, 7)
        assert weighted_stirling_R(2, 0, lam) == lam**2
        assert weighted_stirling_R(5, 0, lam) == lam**5

    def test_rejects_bad_indices(self):
        with pytest.raises(DomainError):
            weighted_stirling_R(0, 0, 1)
        with pytest.raises(DomainError):
            weighted_stirling_R(3, 4, 1)


class TestCNumbers:
    def test_fixtures(self):
        a = Fraction(1, 2)
        assert gen_stirling_c(3, 2, a) == Fraction(3, 8)
        assert gen_stirling_c(3, 1, a) == Fraction(3, 8)

    @pytest.mark.parametrize(
        "alpha", [Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4)]
    )
    def test_boundary_closed_forms(self, alpha):
        table = CNumberTable(12, alpha)
        for n in range(1, 13):
            assert table.value(n, n) == alpha**n
            assert table.value(n, 1) == alpha * rising_factorial(1 - alpha, n - 1)

    def test_positivity(self):
        table = CNumberTable(20, Fraction(2, 3))
        for n in range(1, 21):
            assert all(v > 0 for v in table.row(n))

    def test_log_mode_matches_exact(self):
        import math

        exact = CNumberTable(25, Fraction(1, 2), mode="exact")
        logs = CNumberTable(25, 0.5, mode="log")
        for n in (5, 12, 25):
            for k in range(1, n + 1):
                assert logs.log_value(n, k) == pytest.approx(
                    exact.log_value(n, k), rel=1e-10
                )
        assert math.exp(logs.log_value(3, 2)) == pytest.approx(0.375, rel=1e-12)

    def test_exact_cap(self):
        with pytest.raises(DomainError):
            CNumberTable(201, Fraction(1, 2), mode="exact")
        # auto mode falls back to log storage instead
        table = CNumberTable(201, Fraction(1, 2))
        assert table.mode == "log"

    def test_float_alpha_requires_log(self):
        with pytest.raises(DomainError):
            CNumberTable(10, 0.5, mode="exact")

    def test_index_checks(self):
        table = CNumberTable(5, Fraction(1, 2))
        with pytest.raises(DomainError):
            table.value(6, 1)
        with pytest.raises(DomainError):
            table.value(3, 4)
        with pytest.raises(DomainError):
            gen_stirling_c(3, 0, Fraction(1, 2))

    def test_csv_dump(self, tmp_path):
        table = CNumberTable(4, Fraction(1, 2))
        out = tmp_path / "table.csv"
        table.dump_csv(out)
        lines = out.read_text().splitlines()
        assert lines[0] == "n,k,value,log_space"
        assert lines[1] == "1,1,1/2,0"
        assert len(lines) == 1 + 4 * 5 // 2


class TestEnumeration:
    def test_single(self):
        assert [c.counts for c in enumerate_partitions(1)] == [(1,)]

    def test_order_fixture(self):
        assert [c.counts for c in enumerate_partitions(3)] == [
            (3, 0, 0),
            (1, 1, 0),
            (0, 0, 1),
        ]

    def test_count_small(self):
        assert len(list(enumerate_partitions(5))) == 7

    def test_counts_match_pentagonal_oracle(self):
        for n in range(1, 31):
            assert len(list(enumerate_partitions(n))) == partition_count(n)

    def test_no_duplicates(self):
        seen = set(c.counts for c in enumerate_partitions(12))
        assert len(seen) == partition_count(12)

    @given(st.integers(1, 25))
    @settings(max_examples=20, deadline=None)
    def test_weights_sum_to_n(self, n):
        for c in enumerate_partitions(n):
            assert sum(i * ci for i, ci in enumerate(c.counts, start=1)) == n
            assert 1 <= c.k <= n

    def test_cap(self):
        with pytest.raises(DomainError, match="cap"):
            list(enumerate_partitions(41))
        # explicit cap override works
        assert len(list(enumerate_partitions(41, cap=41))) == partition_count(41)


class TestPartitionCounts:
    def test_validation(self):
        with pytest.raises(DomainError):
            PartitionCounts((1, 1), 2)  # 1*1 + 2*1 = 3 != 2
        with pytest.raises(DomainError):
            PartitionCounts((1,), 2)
        with pytest.raises(DomainError):
            PartitionCounts((-1, 1), 2)

    def test_from_parts(self):
        c = PartitionCounts.from_parts([1, 2], 3)
        assert c.counts == (1, 1, 0)
        assert c.k == 2
        with pytest.raises(DomainError):
            PartitionCounts.from_parts([4], 3)
