"""Bootstrap-permutation two-sample testing.

The pipeline splits the paired data into three equal parts: tune the kernel
hyperparameter on the first, estimate the null (1 - alpha)-quantile on the
second by permuting the pooled points, and compute the test statistic on the
third.  The null hypothesis is rejected iff statistic - quantile > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, HyperparameterError, MommdError, ShapeError
from .kernels import AggregatedGram, Kernel, aggregated_gram, as_sample, gram, kernel_spec
from .mmd import Estimator

# Fixed tags keep the per-stage generator streams disjoint.
_TAG_SPLIT, _TAG_TUNE, _TAG_BOOT, _TAG_STAT = 11, 22, 33, 44


@dataclass(frozen=True)
class TestResult:
    """Outcome of one two-sample test."""

    theta_hat: Kernel
    statistic: float
    quantile: float
    alpha: float
    b_boot: int
    reject: bool
    diff: float
    truncated: bool = False


def _derived_seed(seed: int, *tags: int) -> int:
    return int(np.random.SeedSequence((seed, *tags)).generate_state(1)[0])


def empirical_quantile(values, alpha: float) -> float:
    """The ceil((1 - alpha) * B)-th order statistic of B values."""
    vals = np.sort(np.asarray(values, dtype=np.float64))
    if vals.size < 1:
        raise ShapeError("quantile of an empty sample")
    if not 0 < alpha < 1:
        raise HyperparameterError("alpha must lie in (0, 1)")
    k = min(max(math.ceil((1.0 - alpha) * vals.size), 1), vals.size)
    return float(vals[k - 1])


def _memo_aggregated(memo, key, kernel, xs, ys) -> AggregatedGram:
    if memo is None:
        return aggregated_gram(kernel, xs, ys)
    full_key = (key, kernel_spec(kernel))
    if full_key not in memo:
        memo[full_key] = aggregated_gram(kernel, xs, ys)
    return memo[full_key]


def tune_kernel(
    xs1,
    ys1,
    grid,
    estimator: Estimator,
    seed: int = 0,
    *,
    gram_memo: dict | None = None,
) -> Kernel:
    """Pick the grid kernel maximising the MMD estimate on the tuning split.

    Grid points on which the estimator fails are skipped; ties go to the
    earliest grid position.
    """
    grid = list(grid)
    if not grid:
        raise EstimationError("empty kernel grid")
    xs1, ys1 = as_sample(xs1), as_sample(ys1)
    best = None
    best_val = -math.inf
    for kern in grid:
        try:
            g = _memo_aggregated(gram_memo, "tune", kern, xs1, ys1)
            val = estimator.from_gram(g, seed=seed).value
        except MommdError:
            continue
        if best is None or val > best_val:
            best, best_val = kern, val
    if best is None:
        raise EstimationError("estimator failed on every kernel in the grid")
    return best


def bootstrap_quantile(
    xs2,
    ys2,
    kernel: Kernel,
    estimator: Estimator,
    b_boot: int,
    alpha: float,
    seed: int = 0,
    *,
    pooled_gram: np.ndarray | None = None,
) -> float:
    """Null quantile from seeded permutations of the pooled split-2 points.

    The pooled Gram matrix is computed once; each replicate permutes indices
    into two halves and re-evaluates the estimator.  Replicate b draws its
    permutation from an independently derived stream, so replicates could be
    evaluated in any order (or concurrently) with identical results.
    """
    if b_boot < 1:
        raise HyperparameterError("bootstrap count B must be >= 1")
    xs2, ys2 = as_sample(xs2), as_sample(ys2)
    if len(xs2) != len(ys2) or len(xs2) == 0:
        raise ShapeError("pooled halves need equal non-empty samples")
    n = len(xs2)
    pool = np.concatenate([xs2, ys2])
    if pooled_gram is None:
        pooled_gram = gram(kernel, pool, pool)
    stats = np.empty(b_boot)
    for b in range(b_boot):
        rng = np.random.default_rng(np.random.SeedSequence((seed, _TAG_BOOT, b)))
        perm = rng.permutation(2 * n)
        g = AggregatedGram.from_pooled(pooled_gram, perm[:n], perm[n:])
        stats[b] = estimator.from_gram(g, seed=_derived_seed(seed, _TAG_BOOT, b, 1)).value
    return empirical_quantile(stats, alpha)


def two_sample_test(
    xs,
    ys,
    grid,
    estimator: Estimator,
    b_boot: int,
    alpha: float,
    seed: int = 0,
    *,
    gram_memo: dict | None = None,
) -> TestResult:
    """Run the full three-split test on paired samples of equal size.

    When the common size is not divisible by 3 the trailing remainder (under
    a seeded shuffle) is dropped and the result is flagged ``truncated``.
    """
    xs, ys = as_sample(xs), as_sample(ys)
    if len(xs) != len(ys):
        raise ShapeError(f"samples must have equal size, got {len(xs)} and {len(ys)}")
    n = len(xs)
    if n < 3:
        raise ShapeError("need at least 3 points per side to split in three")
    n_used = n - n % 3
    third = n_used // 3
    rng = np.random.default_rng(np.random.SeedSequence((seed, _TAG_SPLIT)))
    order = rng.permutation(n)[:n_used]
    i1, i2, i3 = order[:third], order[third : 2 * third], order[2 * third :]

    theta = tune_kernel(
        xs[i1], ys[i1], grid, estimator, seed=_derived_seed(seed, _TAG_TUNE), gram_memo=gram_memo
    )
    pooled = None
    if gram_memo is not None:
        key = ("pool", kernel_spec(theta))
        if key not in gram_memo:
            pool2 = np.concatenate([xs[i2], ys[i2]])
            gram_memo[key] = gram(theta, pool2, pool2)
        pooled = gram_memo[key]
    quantile = bootstrap_quantile(
        xs[i2],
        ys[i2],
        theta,
        estimator,
        b_boot,
        alpha,
        seed=_derived_seed(seed, _TAG_BOOT),
        pooled_gram=pooled,
    )
    g3 = _memo_aggregated(gram_memo, "stat", theta, xs[i3], ys[i3])
    statistic = estimator.from_gram(g3, seed=_derived_seed(seed, _TAG_STAT)).value
    diff = statistic - quantile
    return TestResult(
        theta_hat=theta,
        statistic=statistic,
        quantile=quantile,
        alpha=alpha,
        b_boot=b_boot,
        reject=diff > 0,
        diff=diff,
        truncated=n_used != n,
    )
