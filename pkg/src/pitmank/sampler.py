"""Seedable sampler for Pitman partitions via the two-parameter Chinese
restaurant process, plus Monte Carlo estimators with standard errors.

Seating rule: customer m+1 joins an existing block of size s with
probability (s - alpha)/(m + theta) per block, and opens a new block with
probability (theta + k alpha)/(m + theta) where k is the current number of
blocks.  The law of the block-count vector is validated statistically
against the exact pmfs in :mod:`pitmank.distribution`.

Seed derivation rule (part of the public contract, stable across versions):
a draw stream is ``numpy.random.Generator(numpy.random.PCG64(SeedSequence(
root_seed, spawn_key=(stream_index,))))``.  Identical (root_seed,
stream_index) therefore reproduces identical samples; distinct stream
indices give independent streams by the SeedSequence splitting construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as _scipy_stats

from .numerics import DomainError, PitmanParams

__all__ = [
    "SampleStats",
    "SeedSpec",
    "chi_square_gof",
    "crp_sample",
    "empirical_k_counts",
    "mc_moments",
    "sample_k",
    "sample_k_batch",
]


@dataclass(frozen=True)
class SeedSpec:
    """Root seed plus stream index; see the module docstring for the
    derivation rule."""

    root_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= self.root_seed < 2**64:
            raise DomainError("root_seed must fit in 64 bits")
        if self.stream_index < 0:
            raise DomainError("stream_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.root_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(seq))

    def stream(self, offset: int) -> "SeedSpec":
        return SeedSpec(self.root_seed, self.stream_index + offset)


@dataclass(frozen=True)
class SampleStats:
    """Monte Carlo summary of K^r over independent draws."""

    count: int
    mean: float
    variance: float
    standard_error: float
    moment_order: int

    def __post_init__(self):
        if self.count < 2:
            raise DomainError("need at least two replicates")
        if self.variance < 0:
            raise DomainError("variance must be nonnegative")


def crp_sample(params: PitmanParams, seed: SeedSpec):
    """One partition of n drawn by sequential seating; returns the
    component-count vector.

    Block sizes are kept as a size-indexed multiset so each seating step is
    linear in the number of distinct sizes, and the final state is already
    the component-count vector.
    """
    from .combinatorics import PartitionCounts

    rng = seed.generator()
    n = params.n
    alpha = float(params.alpha)
    theta = float(params.theta)
    size_counts: dict[int, int] = {1: 1}  # first customer opens a block
    k = 1
    for m in range(1, n):
        u = rng.random() * (m + theta)
        placed = False
        for s in sorted(size_counts):
            mass = size_counts[s] * (s - alpha)
            if u < mass:
                size_counts[s] -= 1
                if size_counts[s] == 0:
                    del size_counts[s]
                size_counts[s + 1] = size_counts.get(s + 1, 0) + 1
                placed = True
                break
            u -= mass
        if not placed:
            size_counts[1] = size_counts.get(1, 0) + 1
            k += 1
    counts = [0] * n
    for s, c in size_counts.items():
        counts[s - 1] = c
    return PartitionCounts(tuple(counts), n)


def sample_k(params: PitmanParams, seed: SeedSpec) -> int:
    """Number of blocks of a single draw (the length of crp_sample)."""
    return crp_sample(params, seed).k


def sample_k_batch(params: PitmanParams, n_draws: int, seed: SeedSpec) -> np.ndarray:
    """Vectorized draws of the block count K.

    Only the new-block decision matters for K, and its probability
    (theta + k alpha)/(m + theta) depends on the current state through k
    alone, so K is simulated directly as a Markov chain across all draws at
    once.  Marginally identical in law to taking the length of full CRP
    draws (the test suite checks the agreement).
    """
    if n_draws < 1:
        raise DomainError(f"n_draws must be positive, got {n_draws!r}")
    rng = seed.generator()
    n = params.n
    alpha = float(params.alpha)
    theta = float(params.theta)
    k = np.ones(n_draws, dtype=np.int64)
    for m in range(1, n):
        p_new = (theta + k * alpha) / (m + theta)
        k += rng.random(n_draws) < p_new
    return k


def mc_moments(
    params: PitmanParams,
    r: int,
    replicates: int,
    seed: SeedSpec,
    streams: int = 1,
) -> SampleStats:
    """Monte Carlo mean and standard error of K^r.

    Replicates are split as evenly as possible across ``streams``
    independent streams derived from ``seed``; results are concatenated in
    stream order so the floating summation order is reproducible.
    """
    if r < 1:
        raise DomainError(f"moment order must be >= 1, got {r!r}")
    if replicates < 2:
        raise DomainError("variance needs at least two replicates")
    if streams < 1 or streams > replicates:
        raise DomainError("streams must lie in 1..replicates")
    per = [replicates // streams] * streams
    for j in range(replicates % streams):
        per[j] += 1
    chunks = [
        sample_k_batch(params, cnt, seed.stream(j))
        for j, cnt in enumerate(per)
        if cnt
    ]
    values = np.concatenate(chunks).astype(np.float64) ** r
    mean = float(np.mean(values))
    var = float(np.var(values, ddof=1))
    return SampleStats(
        count=replicates,
        mean=mean,
        variance=var,
        standard_error=float(np.sqrt(var / replicates)),
        moment_order=r,
    )


def empirical_k_counts(params: PitmanParams, n_draws: int, seed: SeedSpec) -> np.ndarray:
    """Histogram of K over n_draws, indexed k = 1..n."""
    k = sample_k_batch(params, n_draws, seed)
    return np.bincount(k, minlength=params.n + 1)[1:]


def chi_square_gof(
    observed: np.ndarray, probs, min_expected: float = 5.0
) -> tuple[float, int, float]:
    """Chi-square goodness-of-fit of observed counts against a pmf.

    Cells with expected count below ``min_expected`` are pooled into their
    left neighbour (standard practice for sparse tails).  Returns
    (statistic, degrees of freedom, p-value).
    """
    observed = np.asarray(observed, dtype=np.float64)
    expected = np.asarray([float(p) for p in probs]) * observed.sum()
    if observed.shape != expected.shape:
        raise DomainError("observed and probs must have matching lengths")
    obs_pooled: list[float] = []
    exp_pooled: list[float] = []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_pooled.append(acc_o)
            exp_pooled.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0:
        if exp_pooled:
            obs_pooled[-1] += acc_o
            exp_pooled[-1] += acc_e
        else:
            obs_pooled.append(acc_o)
            exp_pooled.append(acc_e)
    if len(obs_pooled) < 2:
        raise DomainError("fewer than two cells after pooling")
    stat = float(
        sum((o - e) ** 2 / e for o, e in zip(obs_pooled, exp_pooled))
    )
    dof = len(obs_pooled) - 1
    pvalue = float(_scipy_stats.chi2.sf(stat, dof))
    return stat, dof, pvalue
