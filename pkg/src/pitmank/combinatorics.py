"""Stirling numbers, their weighted generalization, the triangular table of
block-count coefficients c(n, k, alpha), and exhaustive enumeration of the
component-count vectors of integer partitions.

The c(n, k, alpha) coefficients are built by the triangular recurrence

    c(n+1, k, alpha) = (n - k alpha) c(n, k, alpha) + alpha c(n, k-1, alpha)

seeded with c(1, 1, alpha) = alpha.  The recurrence itself is validated by
the test suite against two exact identities: the block-count pmf built from
it sums to one, and it reproduces the marginal of the component-count pmf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .numerics import DomainError, Number

__all__ = [
    "CNumberTable",
    "EXACT_TABLE_CAP",
    "PARTITION_ENUMERATION_CAP",
    "PartitionCounts",
    "enumerate_partitions",
    "gen_stirling_c",
    "stirling2",
    "weighted_stirling_R",
]

#: Exact-mode tables are capped to keep rational numerators bounded.
EXACT_TABLE_CAP = 200

#: Default cap for exhaustive partition enumeration (p(40) = 37338 vectors).
PARTITION_ENUMERATION_CAP = 40


@dataclass(frozen=True)
class PartitionCounts:
    """Component counts (c_1, ..., c_n) of an integer partition of n.

    ``counts[i-1]`` is the number of parts of size i, so
    ``sum(i * c_i) == n``.  The number of parts is ``k``.
    """

    counts: tuple[int, ...]
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be positive, got {self.n!r}")
        if len(self.counts) != self.n:
            raise DomainError(
                f"counts must have length n={self.n}, got {len(self.counts)}"
            )
        if any(c < 0 for c in self.counts):
            raise DomainError("counts must be nonnegative")
        total = sum(i * c for i, c in enumerate(self.counts, start=1))
        if total != self.n:
            raise DomainError(
                f"sum of i*c_i must equal n={self.n}, got {total}"
            )

    @property
    def k(self) -> int:
        """Number of parts."""
        return sum(self.counts)

    @classmethod
    def from_parts(cls, parts, n: int | None = None) -> "PartitionCounts":
        """Build from an iterable of part sizes, e.g. [1, 2] for n = 3."""
        parts = list(parts)
        if n is None:
            n = sum(parts)
        counts = [0] * n
        for p in parts:
            if not 1 <= p <= n:
                raise DomainError(f"part {p!r} outside 1..{n}")
            counts[p - 1] += 1
        return cls(tuple(counts), n)


def stirling2(r: int, i: int) -> int:
    """Stirling number of the second kind S2(r, i).

    Uses the recurrence S2(r, i) = i S2(r-1, i) + S2(r-1, i-1) with
    S2(0, 0) = 1.  By convention i > r gives 0.
    """
    if r < 0 or i < 0:
        raise DomainError(f"arguments must be nonnegative, got ({r!r}, {i!r})")
    if i > r:
        return 0
    # row-by-row table, kept only up to column i; S2(m, 0) = 0 for m >= 1
    row = [1] + [0] * i
    for m in range(1, r + 1):
        new = [0] * (i + 1)
        for j in range(1, min(m, i) + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return row[i]


def weighted_stirling_R(r: int, i: int, lam) -> Number:
    """Weighted Stirling number R(r, i, lam) = sum_j C(r, j) lam^j S2(r-j, i).

    Exact for rational ``lam``.  Satisfies R(r, r, lam) = 1 and
    R(r, r-1, lam) = r(r-1)/2 + r lam.
    """
    if r < 1 or i < 0 or i > r:
        raise DomainError(f"need 0 <= i <= r with r >= 1, got ({r!r}, {i!r})")
    total = 0
    lam_pow = 1
    for j in range(r - i + 1):
        s2 = stirling2(r - j, i)
        if s2:
            total = total + math.comb(r, j) * lam_pow * s2
        lam_pow = lam_pow * lam
    return total


class CNumberTable:
    """Triangular table of c(n, k, alpha) for 1 <= k <= n <= n_max.

    ``mode`` is ``"exact"`` (Fraction entries, requires rational alpha and
    n_max <= EXACT_TABLE_CAP), ``"log"`` (float log-scaled entries; every
    recurrence term is positive so log-sum-exp loses nothing), or ``"auto"``.
    """

    def __init__(self, n_max: int, alpha, mode: str = "auto"):
        if n_max < 1:
            raise DomainError(f"n_max must be positive, got {n_max!r}")
        if not 0 < alpha < 1:
            raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
        if mode == "auto":
            exact_ok = isinstance(alpha, (int, Fraction)) and n_max <= EXACT_TABLE_CAP
            mode = "exact" if exact_ok else "log"
        if mode not in ("exact", "log"):
            raise DomainError(f"unknown table mode {mode!r}")
        if mode == "exact":
            if not isinstance(alpha, (int, Fraction)):
                raise DomainError("exact tables require rational alpha")
            if n_max > EXACT_TABLE_CAP:
                raise DomainError(
                    f"exact tables are capped at n_max = {EXACT_TABLE_CAP} "
                    f"(got {n_max}); use log mode for larger n"
                )
        self.n_max = n_max
        self.alpha = alpha
        self.mode = mode
        if mode == "exact":
            self._rows = self._build_exact()
        else:
            self._rows = self._build_log()

    def _build_exact(self):
        a = Fraction(self.alpha)
        rows = [[a]]  # row for n = 1: [c(1,1)]
        for n in range(1, self.n_max):
            prev = rows[-1]
            new = []
            for k in range(1, n + 2):
                val = Fraction(0)
                if k <= n:
                    val += (n - k * a) * prev[k - 1]
                if k - 1 >= 1:
                    val += a * prev[k - 2]
                new.append(val)
            rows.append(new)
        return rows

    def _build_log(self):
        log_a = math.log(float(self.alpha))
        a = float(self.alpha)
        rows = [np.array([log_a])]
        for n in range(1, self.n_max):
            prev = rows[-1]
            new = np.full(n + 1, -np.inf)
            # stay term: (n - k alpha) c(n, k), k = 1..n
            ks = np.arange(1, n + 1)
            new[:n] = prev + np.log(n - ks * a)
            # shift term: alpha c(n, k-1), lands on k = 2..n+1
            new[1:] = np.logaddexp(new[1:], prev + log_a)
            rows.append(new)
        return rows

    def value(self, n: int, k: int) -> Fraction:
        """Exact c(n, k, alpha); only available in exact mode."""
        self._check_indices(n, k)
        if self.mode != "exact":
            raise DomainError("value() requires an exact-mode table; use log_value()")
        return self._rows[n - 1][k - 1]

    def log_value(self, n: int, k: int) -> float:
        """log c(n, k, alpha) as a float, available in both modes."""
        self._check_indices(n, k)
        if self.mode == "exact":
            v = self._rows[n - 1][k - 1]
            return math.log(v.numerator) - math.log(v.denominator)
        return float(self._rows[n - 1][k - 1])

    def row(self, n: int):
        """The entries c(n, 1..n, alpha) (Fractions or log floats)."""
        if not 1 <= n <= self.n_max:
            raise DomainError(f"n must lie in 1..{self.n_max}, got {n!r}")
        return list(self._rows[n - 1])

    def _check_indices(self, n: int, k: int):
        if not 1 <= n <= self.n_max:
            raise DomainError(f"n must lie in 1..{self.n_max}, got {n!r}")
        if not 1 <= k <= n:
            raise DomainError(f"k must lie in 1..{n}, got {k!r}")

    def dump_csv(self, path):
        """Debug dump: columns n,k,value with a log-space flag column."""
        is_log = self.mode == "log"
        with open(path, "w") as fh:
            fh.write("n,k,value,log_space\n")
            for n in range(1, self.n_max + 1):
                for k in range(1, n + 1):
                    if is_log:
                        fh.write(f"{n},{k},{self._rows[n-1][k-1]:.17g},1\n")
                    else:
                        fh.write(f"{n},{k},{self._rows[n-1][k-1]},0\n")


def gen_stirling_c(n: int, k: int, alpha) -> Number:
    """c(n, k, alpha) computed through a fresh table.

    Convenience wrapper; build a :class:`CNumberTable` once when many
    entries are needed.
    """
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k!r} n={n!r}")
    table = CNumberTable(n, alpha)
    if table.mode == "exact":
        return table.value(n, k)
    return math.exp(table.log_value(n, k))


def enumerate_partitions(
    n: int, cap: int = PARTITION_ENUMERATION_CAP
) -> Iterator[PartitionCounts]:
    """Yield every component-count vector of the integer partitions of n,
    exactly once, in lexicographic order of the ascending part lists
    (all-ones partition first, the single part n last).

    ``n`` is capped (default 40) to bound runtime; larger n is rejected.
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n!r}")
    if n > cap:
        raise DomainError(
            f"enumeration of partitions of n={n} exceeds the cap {cap}; "
            f"raise the cap explicitly to proceed"
        )

    def ascending(remaining: int, min_part: int, prefix: list[int]):
        if remaining == 0:
            yield prefix
            return
        for part in range(min_part, remaining + 1):
            yield from ascending(remaining - part, part, prefix + [part])

    for parts in ascending(n, 1, []):
        counts = [0] * n
        for p in parts:
            counts[p - 1] += 1
        yield PartitionCounts(tuple(counts), n)
