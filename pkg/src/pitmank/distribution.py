"""Exact distributions and moments of the block count of a Pitman partition.

Provides the component-count pmf, the pmf of the number of blocks K, the
exact moment formula

    E[K^r] = sum_{i=0}^r (-1)^{r-i} R(r, i, theta/alpha) * P(i)

where R is the weighted Stirling number of the second kind and P(i) is the
gamma-ratio product of :func:`pitmank.numerics.gamma_ratio_product`, plus
brute-force enumeration oracles that compute the same quantities directly
from the component-count pmf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mpf

from .combinatorics import (
    EXACT_TABLE_CAP,
    PARTITION_ENUMERATION_CAP,
    CNumberTable,
    PartitionCounts,
    enumerate_partitions,
    weighted_stirling_R,
)
from .numerics import (
    ApproxScalar,
    DomainError,
    PitmanParams,
    PrecisionError,
    gamma_ratio_product,
    resolve_bits,
    rising_factorial,
    stable_eval,
    to_mpf,
)

__all__ = [
    "MomentReport",
    "exact_moment",
    "length_pmf",
    "length_pmf_oracle",
    "moments_json_payload",
    "oracle_moment",
    "psf_pmf",
]

# Beyond this sample size the automatic mode prefers floating evaluation;
# rational rising factorials of length n-1 get expensive.
EXACT_MOMENT_AUTO_CAP = EXACT_TABLE_CAP


@dataclass(frozen=True)
class MomentReport:
    """Exact moment of a normalized block count next to its approximations.

    ``normalized`` is E[(K/scale)^r] for the scaling named by ``scaling``;
    ``approximations`` maps approximation labels to values, and ``residuals``
    stores approximation minus exact for each label.
    """

    r: int
    exact: float
    scaling: str
    normalized: float
    approximations: dict[str, float] = field(default_factory=dict)
    residuals: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.r < 1:
            raise DomainError(f"moment order must be >= 1, got {self.r!r}")
        for label, approx in self.approximations.items():
            stored = self.residuals.get(label)
            if stored is None or not math.isclose(
                stored, approx - self.normalized, rel_tol=1e-12, abs_tol=1e-300
            ):
                raise DomainError(f"residual for {label!r} is inconsistent")


def psf_pmf(counts: PartitionCounts, params: PitmanParams) -> Fraction | float:
    """Probability of a component-count vector under the two-parameter model:

        n! (theta)_{k;alpha} / (theta)_n *
            prod_i [((1-alpha)_{i-1} / i!)^{c_i} / c_i!]

    Exact parameters give a Fraction, floats give a float.
    """
    if counts.n != params.n:
        raise DomainError(
            f"counts are for n={counts.n} but params have n={params.n}"
        )
    k = counts.k
    if params.is_exact:
        alpha, theta = params.exact_alpha_theta()
        one = Fraction(1)
    else:
        alpha, theta = params.alpha, params.theta
        one = 1.0
    val = (
        one
        * math.factorial(params.n)
        * rising_factorial(theta, k, alpha)
        / rising_factorial(theta, params.n, 1)
    )
    for i, c_i in enumerate(counts.counts, start=1):
        if c_i == 0:
            continue
        base = rising_factorial(1 - alpha, i - 1, 1)
        val *= (one * base / math.factorial(i)) ** c_i
        val /= math.factorial(c_i)
    return val


def length_pmf(
    params: PitmanParams, bits: int | None = None, mode: str = "auto"
) -> list[Fraction] | np.ndarray:
    """Pmf of the number of blocks K, indexed k = 1..n:

        P(K = k) = c(n, k, alpha) / alpha^k * (theta)_{k;alpha} / (theta)_n

    Exact mode returns Fractions summing to exactly 1 and requires rational
    parameters with n within the exact-table cap; floating mode returns a
    float array computed in log space.
    """
    n = params.n
    if mode == "auto":
        mode = "exact" if params.is_exact and n <= EXACT_TABLE_CAP else "float"
    if mode == "exact":
        if not params.is_exact:
            raise DomainError("exact pmf requires rational alpha and theta")
        if n > EXACT_TABLE_CAP:
            raise DomainError(
                f"exact pmf is capped at n = {EXACT_TABLE_CAP} (got {n}); "
                f"use floating mode for larger n"
            )
        alpha, theta = params.exact_alpha_theta()
        table = CNumberTable(n, alpha, mode="exact")
        den = rising_factorial(theta, n, 1)
        out = []
        for k in range(1, n + 1):
            num = rising_factorial(theta, k, alpha)
            out.append(table.value(n, k) / alpha**k * Fraction(num) / Fraction(den))
        return out
    if mode != "float":
        raise DomainError(f"unknown pmf mode {mode!r}")

    alpha = float(params.alpha)
    theta = float(params.theta)
    table = CNumberTable(n, alpha, mode="log")
    log_row = np.array([table.log_value(n, k) for k in range(1, n + 1)])
    ks = np.arange(1, n + 1)
    # log (theta)_{k;alpha} cumulatively; theta may be negative (> -alpha),
    # in which case only the very first factor can be negative and k >= 1
    # keeps a single sign flip.
    factors = theta + alpha * np.arange(0, n)
    if factors[0] == 0:
        raise DomainError("theta = 0 gives a degenerate pmf in floating mode")
    sign0 = -1.0 if factors[0] < 0 else 1.0
    log_num = np.cumsum(np.log(np.abs(factors)))
    # (theta)_n: only the j = 0 factor can be negative since theta > -alpha > -1
    sign_den = -1.0 if theta < 0 else 1.0
    log_den = math.log(abs(theta)) + math.fsum(
        math.log(theta + j) for j in range(1, n)
    )
    logs = log_row - ks * math.log(alpha) + log_num - log_den
    probs = (sign0 * sign_den) * np.exp(logs)
    return probs


def length_pmf_oracle(
    params: PitmanParams, cap: int = PARTITION_ENUMERATION_CAP
) -> list[Fraction]:
    """Pmf of K obtained by marginalizing the component-count pmf over the
    full partition set, grouped by number of parts.  Exact; independent of
    the triangular-recurrence path."""
    alpha, theta = params.exact_alpha_theta()
    out = [Fraction(0)] * params.n
    for counts in enumerate_partitions(params.n, cap=cap):
        out[counts.k - 1] += psf_pmf(counts, params)
    return out


def oracle_moment(
    params: PitmanParams, r: int, cap: int = PARTITION_ENUMERATION_CAP
) -> Fraction:
    """E[K^r] by exhaustive enumeration over the partition set, in exact
    rational arithmetic."""
    if r < 1:
        raise DomainError(f"moment order must be >= 1, got {r!r}")
    total = Fraction(0)
    for counts in enumerate_partitions(params.n, cap=cap):
        total += Fraction(counts.k) ** r * psf_pmf(counts, params)
    return total


def exact_moment(
    params: PitmanParams, r: int, bits: int | None = None, mode: str = "auto"
) -> Fraction | ApproxScalar:
    """E[K^r] through the alternating weighted-Stirling sum.

    ``mode`` is ``"exact"`` (rational arithmetic, requires rational
    parameters), ``"float"`` (certified mpmath evaluation at ``bits``
    precision), or ``"auto"``.  In floating mode the terms are accumulated
    largest magnitude first and the whole sum is re-evaluated at doubled
    precision whenever cancellation eats more than half the working bits,
    failing with :class:`PrecisionError` if it never stabilises.
    """
    if r < 1:
        raise DomainError(f"moment order must be >= 1, got {r!r}")
    if mode == "auto":
        mode = "exact" if params.is_exact and params.n <= EXACT_MOMENT_AUTO_CAP else "float"
    if mode == "exact":
        alpha, theta = params.exact_alpha_theta()
        lam = theta / alpha
        total = Fraction(0)
        for i in range(r + 1):
            ratio = gamma_ratio_product(params, i)
            sign = -1 if (r - i) % 2 else 1
            total += sign * Fraction(weighted_stirling_R(r, i, lam)) * ratio
        return total
    if mode != "float":
        raise DomainError(f"unknown moment mode {mode!r}")

    bits = resolve_bits(bits)
    n = params.n

    def _eval():
        a = to_mpf(params.alpha)
        t = to_mpf(params.theta)
        lam = t / a
        lg = mpmath.loggamma
        terms = []
        for i in range(r + 1):
            if i == 0:
                ratio = mpf(1)
            else:
                ratio = mpmath.exp(
                    lg(t / a + 1 + i)
                    - lg(t / a + 1)
                    + lg(t + n + i * a)
                    - lg(t + n)
                    + lg(t + 1)
                    - lg(t + 1 + i * a)
                )
            sign = -1 if (r - i) % 2 else 1
            terms.append(sign * weighted_stirling_R(r, i, lam) * ratio)
        terms.sort(key=abs, reverse=True)
        total = mpf(0)
        for term in terms:
            total += term
        if terms and total != 0:
            drop = abs(terms[0]) / abs(total)
            if drop > mpf(2) ** (mpmath.mp.prec // 2):
                # signal stable_eval to keep escalating
                raise _Cancellation(drop)
        return total

    prec_failures = 0
    while True:
        try:
            value = stable_eval(_eval, bits)
            return ApproxScalar(value, bits)
        except _Cancellation:
            prec_failures += 1
            if prec_failures > 6:
                raise PrecisionError(
                    f"alternating moment sum for n={n}, r={r} lost more than "
                    f"half its working precision and never stabilised"
                )
            bits *= 2


class _Cancellation(Exception):
    """Internal: the alternating sum cancelled too deeply at this precision."""


def moments_json_payload(
    params: PitmanParams,
    r_values: tuple[int, ...] = (),
    include_pmf: bool = False,
    bits: int | None = None,
    mode: str = "auto",
) -> dict:
    """CLI-facing JSON payload with rationals rendered as "p/q" strings."""

    def render(v):
        if isinstance(v, Fraction):
            return str(v)
        if isinstance(v, ApproxScalar):
            return float(v)
        return float(v)

    payload: dict = {
        "n": params.n,
        "alpha": render(params.alpha),
        "theta": render(params.theta),
    }
    if include_pmf:
        pmf = length_pmf(params, bits=bits, mode=mode)
        payload["pmf"] = [render(p) for p in pmf]
    if r_values:
        payload["moments"] = {
            str(r): render(exact_moment(params, r, bits=bits, mode=mode))
            for r in r_values
        }
    return payload
